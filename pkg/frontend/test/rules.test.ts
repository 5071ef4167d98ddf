import { readFileSync } from 'node:fs'
import { describe, expect, it } from 'vitest'

import { alignTurns, checkDraft, ruleIds } from '../src/rules.js'
import type { ValidationCase } from '../src/types.js'

// Same canonical file the server serves from GET /rules: each case records
// the exact violation set the server's validator produced for that draft.
const cases: ValidationCase[] = JSON.parse(
  readFileSync(
    new URL('../../src/dialkit/service/data/validation_cases.json', import.meta.url),
    'utf-8',
  ),
)

describe('shared case manifest', () => {
  it('is full-size and two-sided', () => {
    expect(cases.length).toBeGreaterThanOrEqual(50)
    const accepted = cases.filter((c) => c.violations.length === 0).length
    expect(accepted).toBeGreaterThanOrEqual(10)
    expect(cases.length - accepted).toBeGreaterThanOrEqual(10)
  })

  it('client validation matches the server on every case', () => {
    for (const c of cases) {
      const originalTexts = c.original.turns.map((t) => t.text)
      const got = ruleIds(checkDraft(originalTexts, c.draft))
      expect(got, `case ${c.name}`).toEqual(c.violations)
    }
  })
})

describe('checkDraft specifics', () => {
  const original = [
    'allora, da dove cominciamo',
    'direi dal sopralluogo di ieri',
    'va bene, raccontami tutto',
    'la porta sul retro era aperta',
  ]
  const draftOf = (texts: string[], speakers?: string[]) =>
    texts.map((text, i) => ({ speaker: speakers?.[i] ?? (i % 2 === 0 ? 'A' : 'B'), text }))

  it('accepts the untouched dialogue', () => {
    expect(checkDraft(original, draftOf(original))).toEqual([])
  })

  it('blank fields short-circuit with turn indices', () => {
    const violations = checkDraft(original, [
      { speaker: 'A', text: original[0] },
      { speaker: '  ', text: '' },
    ])
    expect(violations).toHaveLength(2)
    expect(violations.every((v) => v.rule === 'non-empty-text')).toBe(true)
    expect(violations.map((v) => v.turn_index)).toEqual([1, 1])
  })

  it('an empty draft reports min-turns only', () => {
    expect(ruleIds(checkDraft(original, []))).toEqual(['min-turns'])
  })

  it('a lone mid deletion violates pair-deletion', () => {
    const draft = draftOf([original[0], original[2], original[3]], ['A', 'A', 'B'])
    const got = ruleIds(checkDraft(original, draft))
    expect(got).toContain('pair-deletion')
  })

  it('an edge deletion is exempt', () => {
    expect(checkDraft(original, draftOf(original.slice(1), ['B', 'A', 'B']))).toEqual([])
  })

  it('a mid insertion violates boundary-insertion', () => {
    const texts = [original[0], original[1], 'inciso nuovo', 'altro inciso', ...original.slice(2)]
    const got = ruleIds(checkDraft(original, draftOf(texts)))
    expect(got).toContain('boundary-insertion')
  })

  it('boundary insertions pass', () => {
    const texts = ['premessa del tutto nuova', ...original, 'chiusura del tutto nuova']
    expect(checkDraft(original, draftOf(texts, ['B', 'A', 'B', 'A', 'B', 'A']))).toEqual([])
  })
})

describe('alignTurns', () => {
  it('pairs identical lists one-to-one', () => {
    const pairs = alignTurns(['uno due', 'tre quattro'], ['uno due', 'tre quattro'])
    expect(pairs).toEqual([
      [0, 0],
      [1, 1],
    ])
  })

  it('gaps a dropped turn instead of mangling neighbors', () => {
    const pairs = alignTurns(
      ['uno due tre', 'quattro cinque sei', 'sette otto nove'],
      ['uno due tre', 'sette otto nove'],
    )
    expect(pairs).toEqual([
      [0, 0],
      [1, null],
      [2, 1],
    ])
  })

  it('marks additions as insertions', () => {
    const pairs = alignTurns(['uno due tre'], ['uno due tre', 'coda nuova qui'])
    expect(pairs).toEqual([
      [0, 0],
      [null, 1],
    ])
  })
})
