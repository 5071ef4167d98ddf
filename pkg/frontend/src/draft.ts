/**
 * Client-side working state for one post-editing task. The operation set
 * is deliberately narrow: every mutation either keeps the draft inside
 * the guideline rules or is the first half of a flow the UI completes
 * (deleting a mid-dialogue turn forces merge-adjacent or delete-pair,
 * since a lone mid deletion breaks the adjacency-pair rule).
 */

import { hter } from './hter.js'
import { alignTurns, checkDraft } from './rules.js'
import type {
  DialoguePayload,
  SubmissionBody,
  TurnPayload,
  Violation,
} from './types.js'

export interface DraftSummary {
  editedTurns: number
  deletedTurns: number
  insertedTurns: number
  unchangedTurns: number
  /** live HTER per edited turn, in draft order */
  hterPerEditedTurn: number[]
  totalEdits: number
}

export class DraftState {
  readonly original: DialoguePayload
  private turns: TurnPayload[]
  /** human-readable log of operations applied since the last revert */
  readonly pendingOperations: string[] = []

  constructor(original: DialoguePayload, draft?: TurnPayload[]) {
    this.original = original
    this.turns = (draft ?? original.turns).map((t) => ({ ...t }))
  }

  get workingTurns(): TurnPayload[] {
    return this.turns.map((t) => ({ ...t }))
  }

  get length(): number {
    return this.turns.length
  }

  private originalTexts(): string[] {
    return this.original.turns.map((t) => t.text)
  }

  private checkIndex(index: number): void {
    if (!Number.isInteger(index) || index < 0 || index >= this.turns.length) {
      throw new RangeError(`turn index ${index} out of range`)
    }
  }

  isBoundary(index: number): boolean {
    this.checkIndex(index)
    return index === 0 || index === this.turns.length - 1
  }

  editText(index: number, text: string): void {
    this.checkIndex(index)
    this.turns[index] = { ...this.turns[index], text }
    this.pendingOperations.push(`edit turn ${index}`)
  }

  /** Delete a first or last turn; mid-dialogue turns need a paired flow. */
  deleteTurn(index: number): void {
    this.checkIndex(index)
    if (!this.isBoundary(index)) {
      throw new Error(
        `turn ${index} is mid-dialogue; use deletePair or mergeAdjacent`,
      )
    }
    this.turns.splice(index, 1)
    this.pendingOperations.push(`delete boundary turn ${index}`)
  }

  /**
   * Delete turn `index` together with its previous or next neighbor, so
   * mid-dialogue deletions always remove one adjacency pair.
   */
  deletePair(index: number, withNeighbor: 'previous' | 'next'): void {
    this.checkIndex(index)
    const first = withNeighbor === 'previous' ? index - 1 : index
    if (first < 0 || first + 1 >= this.turns.length) {
      throw new RangeError(
        `turn ${index} has no ${withNeighbor} neighbor to pair with`,
      )
    }
    this.turns.splice(first, 2)
    this.pendingOperations.push(`delete pair at ${first}`)
  }

  /**
   * Remove a mid-dialogue turn and merge its two neighbors (who now hold
   * the floor back to back) into one turn, preserving alternation.
   */
  mergeAdjacent(index: number): void {
    this.checkIndex(index)
    if (this.isBoundary(index)) {
      throw new Error(`turn ${index} is at a boundary; delete it directly`)
    }
    const before = this.turns[index - 1]
    const after = this.turns[index + 1]
    const merged = { speaker: before.speaker, text: `${before.text} ${after.text}` }
    this.turns.splice(index - 1, 3, merged)
    this.pendingOperations.push(`merge around turn ${index}`)
  }

  /** Merge two consecutive same-speaker turns into the first of the two. */
  mergeWithNext(index: number): void {
    this.checkIndex(index)
    if (index + 1 >= this.turns.length) {
      throw new RangeError(`turn ${index} has no next turn`)
    }
    const a = this.turns[index]
    const b = this.turns[index + 1]
    if (a.speaker !== b.speaker) {
      throw new Error('only consecutive same-speaker turns can merge')
    }
    this.turns.splice(index, 2, { speaker: a.speaker, text: `${a.text} ${b.text}` })
    this.pendingOperations.push(`merge turns ${index} and ${index + 1}`)
  }

  private flipOf(speaker: string): string {
    const speakers = [...new Set(this.turns.map((t) => t.speaker))]
    const other = speakers.find((s) => s !== speaker)
    return other ?? speaker
  }

  insertAtStart(text: string, speaker?: string): void {
    const s = speaker ?? (this.turns.length > 0 ? this.flipOf(this.turns[0].speaker) : 'S1')
    this.turns.unshift({ speaker: s, text })
    this.pendingOperations.push('insert at start')
  }

  insertAtEnd(text: string, speaker?: string): void {
    const s =
      speaker ??
      (this.turns.length > 0
        ? this.flipOf(this.turns[this.turns.length - 1].speaker)
        : 'S1')
    this.turns.push({ speaker: s, text })
    this.pendingOperations.push('insert at end')
  }

  revert(): void {
    this.turns = this.original.turns.map((t) => ({ ...t }))
    this.pendingOperations.length = 0
  }

  validate(): Violation[] {
    return checkDraft(this.originalTexts(), this.turns)
  }

  /** Per-rule pass/fail flags; submission is enabled only when all pass. */
  ruleFlags(ruleIdList: string[]): Map<string, boolean> {
    const failed = new Set(this.validate().map((v) => v.rule))
    return new Map(ruleIdList.map((id) => [id, !failed.has(id)]))
  }

  get canSubmit(): boolean {
    return this.validate().length === 0
  }

  /** Live badge numbers, recomputed from the turn alignment on each call. */
  summary(): DraftSummary {
    const pairs = alignTurns(
      this.originalTexts(),
      this.turns.map((t) => t.text),
    )
    let edited = 0
    let deleted = 0
    let inserted = 0
    let unchanged = 0
    const hters: number[] = []
    for (const [oi, pj] of pairs) {
      if (oi === null && pj !== null) {
        inserted++
      } else if (oi !== null && pj === null) {
        deleted++
      } else if (oi !== null && pj !== null) {
        const before = this.original.turns[oi].text
        const after = this.turns[pj].text
        if (before === after) {
          unchanged++
        } else {
          edited++
          hters.push(hter(before, after))
        }
      }
    }
    return {
      editedTurns: edited,
      deletedTurns: deleted,
      insertedTurns: inserted,
      unchangedTurns: unchanged,
      hterPerEditedTurn: hters,
      totalEdits: edited + deleted + inserted,
    }
  }

  payload(baseVersion: number, seconds: number): SubmissionBody {
    return {
      base_version: baseVersion,
      seconds,
      turns: this.workingTurns,
    }
  }
}
