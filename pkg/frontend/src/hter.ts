/**
 * Word-level edit distance and HTER, ported one-for-one from the core
 * library so the editor can show live numbers without a server round
 * trip. The shared golden file served by GET /rules pins the two
 * implementations together; see test/hter.test.ts.
 */

// Punctuation split off as standalone tokens. The curly apostrophe is
// included alongside the ASCII one because Italian text mixes both.
const PUNCT_RE = /([.,;:!?…"'«»’])/gu

/** Lowercase word tokenization with punctuation detached. */
export function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .replace(PUNCT_RE, ' $1 ')
    .split(/\s+/u)
    .filter((t) => t.length > 0)
}

export interface EditBreakdown {
  substitutions: number
  insertions: number
  deletions: number
  total: number
}

function asTokens(value: string | string[]): string[] {
  return typeof value === 'string' ? tokenize(value) : value
}

/**
 * Minimal unit-cost edit script turning token sequence a into b.
 * The total is unique; when several scripts are co-minimal the
 * breakdown prefers substitutions, then deletions, then insertions.
 */
export function wordEditDistance(
  a: string | string[],
  b: string | string[],
): EditBreakdown {
  const src = asTokens(a)
  const dst = asTokens(b)
  const n = src.length
  const m = dst.length
  const dist: number[][] = []
  for (let i = 0; i <= n; i++) dist.push(new Array<number>(m + 1).fill(0))
  for (let i = 1; i <= n; i++) dist[i][0] = i
  for (let j = 1; j <= m; j++) dist[0][j] = j
  for (let i = 1; i <= n; i++) {
    const row = dist[i]
    const prev = dist[i - 1]
    for (let j = 1; j <= m; j++) {
      const sub = prev[j - 1] + (src[i - 1] !== dst[j - 1] ? 1 : 0)
      row[j] = Math.min(sub, prev[j] + 1, row[j - 1] + 1)
    }
  }
  let subs = 0
  let ins = 0
  let dels = 0
  let i = n
  let j = m
  while (i > 0 || j > 0) {
    if (
      i > 0 &&
      j > 0 &&
      dist[i][j] === dist[i - 1][j - 1] + (src[i - 1] !== dst[j - 1] ? 1 : 0)
    ) {
      if (src[i - 1] !== dst[j - 1]) subs++
      i--
      j--
    } else if (i > 0 && dist[i][j] === dist[i - 1][j] + 1) {
      dels++
      i--
    } else {
      ins++
      j--
    }
  }
  return { substitutions: subs, insertions: ins, deletions: dels, total: subs + ins + dels }
}

/**
 * Word edits needed to turn `original` into `postedited`, divided by the
 * post-edited (reference) token count. Both sides must be non-empty.
 */
export function hter(
  original: string | string[],
  postedited: string | string[],
): number {
  const src = asTokens(original)
  const ref = asTokens(postedited)
  if (ref.length === 0) throw new Error('hter reference is empty')
  if (src.length === 0) throw new Error('hter original is empty')
  return wordEditDistance(src, ref).total / ref.length
}
