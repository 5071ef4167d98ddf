/**
 * Client-side mirror of the server's submission rules. A draft that
 * passes checkDraft is accepted by PUT /tasks/{id}; one that fails is
 * rejected with the same rule ids. The parity is pinned against the
 * shared case manifest served by GET /rules (test/rules.test.ts).
 */

import { tokenize, wordEditDistance } from './hter.js'
import type { TurnPayload, Violation } from './types.js'

export const RULE_TWO_SPEAKERS = 'two-speakers'
export const RULE_ALTERNATION = 'alternation'
export const RULE_MIN_TURNS = 'min-turns'
export const RULE_NON_EMPTY_TEXT = 'non-empty-text'
export const RULE_PAIR_DELETION = 'pair-deletion'
export const RULE_BOUNDARY_INSERTION = 'boundary-insertion'

export type AlignmentPair = [number | null, number | null]

/**
 * Minimum-cost monotone turn alignment between two turn text lists.
 * Pair cost is the word edit distance between the turns; gapping a turn
 * costs its full token count. Among co-minimal alignments the backtrace
 * prefers pairing, then deleting an original turn, then insertion.
 */
export function alignTurns(
  originalTexts: string[],
  draftTexts: string[],
): AlignmentPair[] {
  const src = originalTexts.map(tokenize)
  const dst = draftTexts.map(tokenize)
  const n = src.length
  const m = dst.length
  const pairCost: number[][] = []
  for (let i = 0; i < n; i++) {
    const row: number[] = []
    for (let j = 0; j < m; j++) row.push(wordEditDistance(src[i], dst[j]).total)
    pairCost.push(row)
  }
  const dp: number[][] = []
  for (let i = 0; i <= n; i++) dp.push(new Array<number>(m + 1).fill(0))
  for (let i = 1; i <= n; i++) dp[i][0] = dp[i - 1][0] + src[i - 1].length
  for (let j = 1; j <= m; j++) dp[0][j] = dp[0][j - 1] + dst[j - 1].length
  for (let i = 1; i <= n; i++) {
    for (let j = 1; j <= m; j++) {
      dp[i][j] = Math.min(
        dp[i - 1][j - 1] + pairCost[i - 1][j - 1],
        dp[i - 1][j] + src[i - 1].length,
        dp[i][j - 1] + dst[j - 1].length,
      )
    }
  }
  const pairs: AlignmentPair[] = []
  let i = n
  let j = m
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && dp[i][j] === dp[i - 1][j - 1] + pairCost[i - 1][j - 1]) {
      pairs.push([i - 1, j - 1])
      i--
      j--
    } else if (i > 0 && dp[i][j] === dp[i - 1][j] + src[i - 1].length) {
      pairs.push([i - 1, null])
      i--
    } else {
      pairs.push([null, j - 1])
      j--
    }
  }
  pairs.reverse()
  return pairs
}

function violation(rule: string, turnIndex: number | null, message: string): Violation {
  return { rule, turn_index: turnIndex, message }
}

/**
 * Hold a draft turn list to the guideline rules, against its original.
 *
 * Blank fields short-circuit (nothing else can be checked on them).
 * Structural rules run on the draft alone; the deletion and insertion
 * rules come from the monotone alignment against the original: a maximal
 * run of deleted original turns must have even length unless it touches
 * the first or last original turn, and a run of inserted turns must
 * touch the first or last draft position.
 */
export function checkDraft(
  originalTexts: string[],
  draft: TurnPayload[],
): Violation[] {
  const violations: Violation[] = []
  draft.forEach((turn, idx) => {
    if (turn.speaker.trim() === '') {
      violations.push(
        violation(RULE_NON_EMPTY_TEXT, idx, `turn ${idx} has a blank speaker`),
      )
    }
    if (turn.text.trim() === '') {
      violations.push(
        violation(RULE_NON_EMPTY_TEXT, idx, `turn ${idx} has blank text`),
      )
    }
  })
  if (violations.length > 0) return violations
  if (draft.length === 0) {
    return [violation(RULE_MIN_TURNS, null, 'draft has no turns')]
  }

  const speakers: string[] = []
  for (const turn of draft) {
    if (!speakers.includes(turn.speaker)) speakers.push(turn.speaker)
  }
  if (speakers.length !== 2) {
    violations.push(
      violation(
        RULE_TWO_SPEAKERS,
        null,
        `expected exactly 2 speakers, found ${speakers.length}`,
      ),
    )
  }
  for (let i = 1; i < draft.length; i++) {
    if (draft[i].speaker === draft[i - 1].speaker) {
      violations.push(
        violation(
          RULE_ALTERNATION,
          i,
          `turn ${i} repeats speaker '${draft[i].speaker}'`,
        ),
      )
    }
  }
  if (draft.length < 3) {
    violations.push(
      violation(
        RULE_MIN_TURNS,
        null,
        `dialogue has ${draft.length} turns, needs 3`,
      ),
    )
  }

  const pairs = alignTurns(
    originalTexts,
    draft.map((t) => t.text),
  )
  const nOrig = originalTexts.length
  const nDraft = draft.length
  const deletedRuns: number[][] = []
  const insertedRuns: number[][] = []
  let run: number[] = []
  let insRun: number[] = []
  for (const [oi, pj] of pairs) {
    if (oi !== null && pj === null) {
      run.push(oi)
    } else if (run.length > 0) {
      deletedRuns.push(run)
      run = []
    }
    if (oi === null && pj !== null) {
      insRun.push(pj)
    } else if (insRun.length > 0) {
      insertedRuns.push(insRun)
      insRun = []
    }
  }
  if (run.length > 0) deletedRuns.push(run)
  if (insRun.length > 0) insertedRuns.push(insRun)

  for (const del of deletedRuns) {
    const touchesEdge = del[0] === 0 || del[del.length - 1] === nOrig - 1
    if (!touchesEdge && del.length % 2 === 1) {
      violations.push(
        violation(
          RULE_PAIR_DELETION,
          del[0],
          `${del.length} turn(s) deleted mid-dialogue at original turn ` +
            `${del[0]}; mid-dialogue deletions come in pairs`,
        ),
      )
    }
  }
  for (const ins of insertedRuns) {
    if (ins[0] !== 0 && ins[ins.length - 1] !== nDraft - 1) {
      violations.push(
        violation(
          RULE_BOUNDARY_INSERTION,
          ins[0],
          `turn inserted mid-dialogue at draft position ${ins[0]}; ` +
            'insertions are allowed only at the beginning or end',
        ),
      )
    }
  }
  return violations
}

/** Sorted unique rule ids, the comparison key used by the shared manifest. */
export function ruleIds(violations: Violation[]): string[] {
  return [...new Set(violations.map((v) => v.rule))].sort()
}
