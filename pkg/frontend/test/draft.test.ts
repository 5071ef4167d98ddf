import { describe, expect, it } from 'vitest'

import { DraftState } from '../src/draft.js'
import { tokenize } from '../src/hter.js'
import type { DialoguePayload } from '../src/types.js'

const SIX: DialoguePayload = {
  id: 'caso#0#0',
  source: 'LLM',
  turns: [
    { speaker: 'A', text: 'allora, da dove cominciamo' },
    { speaker: 'B', text: 'direi dal sopralluogo di ieri' },
    { speaker: 'A', text: 'va bene, raccontami tutto' },
    { speaker: 'B', text: 'la porta sul retro era aperta' },
    { speaker: 'A', text: 'qualcuno ha visto qualcosa' },
    { speaker: 'B', text: 'il vicino dice di no' },
  ],
}

describe('pair-deletion flow', () => {
  it('mid delete alone is refused by the API surface', () => {
    const draft = new DraftState(SIX)
    expect(() => draft.deleteTurn(2)).toThrow(/mid-dialogue/)
  })

  it('delete with next neighbor yields a server-acceptable draft', () => {
    const draft = new DraftState(SIX)
    draft.deletePair(2, 'next')
    expect(draft.workingTurns.map((t) => t.text)).toEqual([
      SIX.turns[0].text,
      SIX.turns[1].text,
      SIX.turns[4].text,
      SIX.turns[5].text,
    ])
    expect(draft.validate()).toEqual([])
    expect(draft.canSubmit).toBe(true)
  })

  it('delete with previous neighbor also validates', () => {
    const draft = new DraftState(SIX)
    draft.deletePair(3, 'previous')
    expect(draft.validate()).toEqual([])
  })

  it('merge-adjacent removes the turn and joins the neighbors', () => {
    const draft = new DraftState(SIX)
    draft.mergeAdjacent(3)
    const texts = draft.workingTurns.map((t) => t.text)
    expect(texts).toHaveLength(4)
    expect(texts[2]).toBe(`${SIX.turns[2].text} ${SIX.turns[4].text}`)
    expect(draft.workingTurns[2].speaker).toBe('A')
    expect(draft.validate()).toEqual([])
  })

  it('boundary turns delete directly', () => {
    const draft = new DraftState(SIX)
    draft.deleteTurn(0)
    draft.deleteTurn(draft.length - 1)
    expect(draft.validate()).toEqual([])
    expect(draft.length).toBe(4)
  })
})

describe('merge button for same-speaker neighbors', () => {
  it('merges only same-speaker consecutive turns', () => {
    const draft = new DraftState(SIX)
    expect(() => draft.mergeWithNext(0)).toThrow(/same-speaker/)
  })
})

describe('insertions', () => {
  it('are boundary-only and auto-flip the speaker', () => {
    const draft = new DraftState(SIX)
    draft.insertAtStart('una premessa')
    draft.insertAtEnd('una coda')
    const turns = draft.workingTurns
    expect(turns[0].speaker).toBe('B')
    expect(turns[turns.length - 1].speaker).toBe('A')
    expect(draft.validate()).toEqual([])
  })
})

describe('validation flags and submit gating', () => {
  it('trimming to two turns raises the min-turns flag', () => {
    const draft = new DraftState(SIX)
    for (let i = 0; i < 4; i++) draft.deleteTurn(draft.length - 1)
    expect(draft.length).toBe(2)
    const flags = draft.ruleFlags(['min-turns', 'alternation'])
    expect(flags.get('min-turns')).toBe(false)
    expect(flags.get('alternation')).toBe(true)
    expect(draft.canSubmit).toBe(false)
  })

  it('blanking a turn disables submit', () => {
    const draft = new DraftState(SIX)
    draft.editText(1, '   ')
    expect(draft.canSubmit).toBe(false)
  })
})

describe('live badge', () => {
  it('editing one word shows HTER 1/len(reference turn)', () => {
    const draft = new DraftState(SIX)
    const edited = 'direi dal sopralluogo di oggi'
    draft.editText(1, edited)
    const summary = draft.summary()
    expect(summary.editedTurns).toBe(1)
    expect(summary.hterPerEditedTurn).toHaveLength(1)
    expect(summary.hterPerEditedTurn[0]).toBeCloseTo(1 / tokenize(edited).length, 12)
  })

  it('tracks deletions and insertions separately', () => {
    const draft = new DraftState(SIX)
    draft.deletePair(2, 'next')
    draft.insertAtEnd('chiusura completamente nuova')
    const summary = draft.summary()
    expect(summary.deletedTurns).toBe(2)
    expect(summary.insertedTurns).toBe(1)
    expect(summary.unchangedTurns).toBe(4)
    expect(summary.totalEdits).toBe(3)
  })

  it('is all-unchanged on a fresh draft', () => {
    const summary = new DraftState(SIX).summary()
    expect(summary.unchangedTurns).toBe(6)
    expect(summary.totalEdits).toBe(0)
    expect(summary.hterPerEditedTurn).toEqual([])
  })
})

describe('payload and bookkeeping', () => {
  it('payload carries base version, seconds, and the working turns', () => {
    const draft = new DraftState(SIX)
    draft.editText(0, 'allora, da dove si comincia')
    const body = draft.payload(1, 97.5)
    expect(body.base_version).toBe(1)
    expect(body.seconds).toBe(97.5)
    expect(body.turns[0].text).toBe('allora, da dove si comincia')
    expect(body.turns).toHaveLength(6)
  })

  it('revert restores the original and clears the op log', () => {
    const draft = new DraftState(SIX)
    draft.editText(0, 'qualcosa di diverso')
    draft.deleteTurn(0)
    expect(draft.pendingOperations.length).toBe(2)
    draft.revert()
    expect(draft.workingTurns).toEqual(SIX.turns)
    expect(draft.pendingOperations).toEqual([])
  })

  it('resumes from a server-side draft when one exists', () => {
    const prior = SIX.turns.slice(1)
    const draft = new DraftState(SIX, prior)
    expect(draft.length).toBe(5)
    expect(draft.workingTurns[0].text).toBe(SIX.turns[1].text)
  })
})
