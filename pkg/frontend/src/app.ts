/**
 * Browser entry point: a task queue plus a side-by-side post-editing
 * editor, talking only to the curation service API. Connection settings
 * come from the query string (?service=http://localhost:8800&annotator=me)
 * with prompts as fallback.
 */

import { ConflictError, RejectedError, TransportError, WorkbenchApi } from './api.js'
import { DraftState } from './draft.js'
import { ActiveTimer } from './timer.js'
import type { RuleInfo, TaskDetail, TaskRow, TurnPayload } from './types.js'

const DRAFT_STORE_PREFIX = 'dialkit-draft:'

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

class WorkbenchApp {
  private readonly api: WorkbenchApi
  private readonly root: HTMLElement
  private rules: RuleInfo[] = []
  private current: TaskDetail | null = null
  private draft: DraftState | null = null
  private timer = new ActiveTimer()
  private showSources = true
  private statusLine: HTMLElement

  constructor(root: HTMLElement, api: WorkbenchApi) {
    this.root = root
    this.api = api
    this.statusLine = el('div', 'status')
    document.addEventListener('visibilitychange', () => {
      this.timer.setVisible(document.visibilityState === 'visible')
    })
    window.addEventListener('focus', () => this.timer.setFocused(true))
    window.addEventListener('blur', () => this.timer.setFocused(false))
    document.addEventListener('keydown', () => this.timer.touch())
    document.addEventListener('pointerdown', () => this.timer.touch())
  }

  async start(): Promise<void> {
    try {
      this.rules = (await this.api.rules()).rules
    } catch (err) {
      this.fatal(`cannot load rule manifest: ${String(err)}`)
      return
    }
    await this.showQueue()
  }

  private fatal(message: string): void {
    this.root.replaceChildren(el('p', 'error', message))
  }

  private status(message: string, kind: 'info' | 'error' = 'info'): void {
    this.statusLine.textContent = message
    this.statusLine.className = `status ${kind}`
  }

  // -- task queue -----------------------------------------------------------

  private async showQueue(): Promise<void> {
    let tasks: TaskRow[]
    try {
      tasks = await this.api.listTasks()
    } catch (err) {
      this.fatal(`cannot list tasks: ${String(err)}`)
      return
    }
    const pane = el('div', 'queue')
    pane.append(el('h1', undefined, 'Review queue'))
    pane.append(this.statusLine)
    const table = el('table')
    const head = el('tr')
    for (const col of ['dialogue', 'source', 'turns', 'state', 'assignee', '']) {
      head.append(el('th', undefined, col))
    }
    table.append(head)
    for (const task of tasks) {
      const row = el('tr', `state-${task.state}`)
      row.append(el('td', 'mono', task.dialogue_id))
      row.append(el('td', undefined, this.showSources ? (task.source ?? '') : '·'))
      row.append(el('td', undefined, String(task.turn_count ?? '')))
      row.append(el('td', undefined, task.state))
      row.append(el('td', undefined, task.assignee ?? ''))
      const actions = el('td')
      if (task.state === 'pending') {
        const claim = el('button', undefined, 'claim')
        claim.addEventListener('click', () => void this.claimTask(task.dialogue_id))
        actions.append(claim)
      } else if (task.state === 'in_progress' && task.assignee === this.api.annotator) {
        const resume = el('button', undefined, 'resume')
        resume.addEventListener('click', () => void this.openTask(task.dialogue_id))
        actions.append(resume)
      }
      row.append(actions)
      table.append(row)
    }
    pane.append(table)
    const toggle = el('button', undefined, this.showSources ? 'hide sources' : 'show sources')
    toggle.addEventListener('click', () => {
      this.showSources = !this.showSources
      void this.showQueue()
    })
    pane.append(toggle)
    this.root.replaceChildren(pane)
  }

  private async claimTask(id: string): Promise<void> {
    try {
      this.current = await this.api.claim(id)
    } catch (err) {
      if (err instanceof ConflictError) {
        this.status(`task already taken: ${err.message}`, 'error')
        await this.showQueue()
        return
      }
      this.status(String(err), 'error')
      return
    }
    this.openEditor()
  }

  private async openTask(id: string): Promise<void> {
    try {
      this.current = await this.api.getTask(id)
    } catch (err) {
      this.status(String(err), 'error')
      return
    }
    this.openEditor()
  }

  // -- editor ---------------------------------------------------------------

  private openEditor(): void {
    const detail = this.current
    if (!detail) return
    const saved = this.restoreDraft(detail.original.id)
    this.draft = new DraftState(detail.original, saved ?? detail.draft?.turns)
    this.timer.reset()
    this.timer.start()
    this.renderEditor()
  }

  private renderEditor(): void {
    const detail = this.current
    const draft = this.draft
    if (!detail || !draft) return
    const pane = el('div', 'editor')
    const heading = el('h1', undefined, `Editing ${detail.original.id}`)
    pane.append(heading)
    if (this.showSources) {
      pane.append(el('p', 'source-label', `source: ${detail.original.source}`))
    }
    pane.append(this.statusLine)

    const columns = el('div', 'columns')
    columns.append(this.renderOriginalPane())
    columns.append(this.renderDraftPane())
    pane.append(columns)

    pane.append(this.renderBadge())
    pane.append(this.renderFlags())
    pane.append(this.renderActions())
    this.root.replaceChildren(pane)
  }

  private renderOriginalPane(): HTMLElement {
    const detail = this.current!
    const side = el('div', 'pane original')
    side.append(el('h2', undefined, 'Original (read-only)'))
    for (const turn of detail.original.turns) {
      const row = el('div', 'turn')
      row.append(el('span', 'speaker', turn.speaker))
      row.append(el('span', 'text', turn.text))
      side.append(row)
    }
    return side
  }

  private renderDraftPane(): HTMLElement {
    const draft = this.draft!
    const side = el('div', 'pane draft')
    side.append(el('h2', undefined, 'Draft'))

    const insertTop = el('button', 'insert', '+ insert at start')
    insertTop.addEventListener('click', () => {
      draft.insertAtStart('')
      this.renderEditor()
    })
    side.append(insertTop)

    draft.workingTurns.forEach((turn, index) => {
      side.append(this.renderDraftTurn(turn, index))
    })

    const insertBottom = el('button', 'insert', '+ insert at end')
    insertBottom.addEventListener('click', () => {
      draft.insertAtEnd('')
      this.renderEditor()
    })
    side.append(insertBottom)
    return side
  }

  private renderDraftTurn(turn: TurnPayload, index: number): HTMLElement {
    const draft = this.draft!
    const row = el('div', 'turn')
    row.append(el('span', 'speaker', turn.speaker))
    const input = el('textarea')
    input.value = turn.text
    input.addEventListener('input', () => {
      this.timer.touch()
      draft.editText(index, input.value)
      this.refreshLiveBits()
    })
    row.append(input)

    const remove = el('button', undefined, 'delete')
    remove.addEventListener('click', () => {
      if (draft.isBoundary(index)) {
        draft.deleteTurn(index)
        this.renderEditor()
      } else {
        this.askPairChoice(row, index)
      }
    })
    row.append(remove)

    const turns = draft.workingTurns
    if (index + 1 < turns.length && turns[index + 1].speaker === turn.speaker) {
      const merge = el('button', undefined, 'merge with next')
      merge.addEventListener('click', () => {
        draft.mergeWithNext(index)
        this.renderEditor()
      })
      row.append(merge)
    }
    return row
  }

  /** Mid-dialogue deletion needs a decision; offer the three legal moves. */
  private askPairChoice(row: HTMLElement, index: number): void {
    const draft = this.draft!
    const chooser = el('div', 'pair-chooser')
    chooser.append(
      el(
        'span',
        undefined,
        'Mid-dialogue deletions break the reply structure. Remove the pair, or merge the neighbors:',
      ),
    )
    const options: Array<[string, () => void]> = [
      ['delete with previous', () => draft.deletePair(index, 'previous')],
      ['delete with next', () => draft.deletePair(index, 'next')],
      ['merge neighbors', () => draft.mergeAdjacent(index)],
      ['cancel', () => undefined],
    ]
    for (const [label, apply] of options) {
      const button = el('button', undefined, label)
      button.addEventListener('click', () => {
        apply()
        this.renderEditor()
      })
      chooser.append(button)
    }
    row.append(chooser)
  }

  private renderBadge(): HTMLElement {
    const badge = el('div', 'badge')
    badge.id = 'live-badge'
    badge.textContent = this.badgeText()
    return badge
  }

  private badgeText(): string {
    const s = this.draft!.summary()
    const mean =
      s.hterPerEditedTurn.length > 0
        ? (
            s.hterPerEditedTurn.reduce((a, b) => a + b, 0) / s.hterPerEditedTurn.length
          ).toFixed(3)
        : '–'
    return (
      `edits: ${s.totalEdits} (${s.editedTurns} edited, ${s.deletedTurns} deleted, ` +
      `${s.insertedTurns} inserted) · mean turn HTER: ${mean} · ` +
      `active: ${Math.round(this.timer.seconds())}s`
    )
  }

  private renderFlags(): HTMLElement {
    const flags = el('ul', 'flags')
    flags.id = 'rule-flags'
    this.fillFlags(flags)
    return flags
  }

  private fillFlags(flags: HTMLElement): void {
    const draft = this.draft!
    flags.replaceChildren()
    const status = draft.ruleFlags(this.rules.map((r) => r.id))
    for (const rule of this.rules) {
      const ok = status.get(rule.id) ?? true
      const item = el('li', ok ? 'ok' : 'violated')
      item.textContent = `${ok ? '✓' : '✗'} ${rule.id}: ${rule.description}`
      flags.append(item)
    }
  }

  private refreshLiveBits(): void {
    const badge = document.getElementById('live-badge')
    if (badge) badge.textContent = this.badgeText()
    const flags = document.getElementById('rule-flags')
    if (flags) this.fillFlags(flags)
    const submit = document.getElementById('submit-button') as HTMLButtonElement | null
    if (submit) submit.disabled = !this.draft!.canSubmit
  }

  private renderActions(): HTMLElement {
    const detail = this.current!
    const draft = this.draft!
    const bar = el('div', 'actions')

    const submit = el('button', undefined, 'submit')
    submit.id = 'submit-button'
    submit.disabled = !draft.canSubmit
    submit.addEventListener('click', () => void this.submit())
    bar.append(submit)

    const discard = el('button', 'danger', 'delete dialogue')
    discard.addEventListener('click', () => void this.deleteDialogue())
    bar.append(discard)

    const revert = el('button', undefined, 'revert')
    revert.addEventListener('click', () => {
      draft.revert()
      this.clearSavedDraft(detail.original.id)
      this.renderEditor()
    })
    bar.append(revert)

    const back = el('button', undefined, 'back to queue')
    back.addEventListener('click', () => {
      this.saveDraft()
      void this.showQueue()
    })
    bar.append(back)
    return bar
  }

  private async submit(): Promise<void> {
    const detail = this.current!
    const draft = this.draft!
    const seconds = Math.max(this.timer.stop(), 1)
    try {
      this.current = await this.api.submit(
        detail.original.id,
        draft.payload(detail.task.version, seconds),
      )
    } catch (err) {
      this.timer.start()
      if (err instanceof RejectedError) {
        this.status(
          `rejected: ${err.violations.map((v) => `${v.rule} (${v.message})`).join('; ')}`,
          'error',
        )
        this.refreshLiveBits()
        return
      }
      if (err instanceof ConflictError) {
        if (window.confirm(`${err.message}\n\nReload the task? Your draft stays as-is.`)) {
          await this.reloadTask()
        }
        return
      }
      if (err instanceof TransportError) {
        this.saveDraft()
        this.status('service unreachable; draft saved locally', 'error')
        return
      }
      this.status(String(err), 'error')
      return
    }
    this.clearSavedDraft(detail.original.id)
    this.status(`submitted ${detail.original.id}`)
    await this.showQueue()
  }

  private async deleteDialogue(): Promise<void> {
    const detail = this.current!
    if (!window.confirm(`Discard dialogue ${detail.original.id}? Deletion is final.`)) {
      return
    }
    const seconds = Math.max(this.timer.stop(), 1)
    try {
      await this.api.deleteDialogue(detail.original.id, detail.task.version, seconds)
    } catch (err) {
      this.timer.start()
      if (err instanceof ConflictError) {
        if (window.confirm(`${err.message}\n\nReload the task?`)) await this.reloadTask()
        return
      }
      this.status(String(err), 'error')
      return
    }
    this.clearSavedDraft(detail.original.id)
    await this.showQueue()
  }

  private async reloadTask(): Promise<void> {
    const id = this.current!.original.id
    try {
      this.current = await this.api.getTask(id)
    } catch (err) {
      this.status(String(err), 'error')
      return
    }
    this.timer.start()
    this.renderEditor()
  }

  // -- local draft persistence ------------------------------------------------

  private saveDraft(): void {
    const detail = this.current
    const draft = this.draft
    if (!detail || !draft) return
    window.localStorage.setItem(
      DRAFT_STORE_PREFIX + detail.original.id,
      JSON.stringify(draft.workingTurns),
    )
  }

  private restoreDraft(id: string): TurnPayload[] | null {
    const raw = window.localStorage.getItem(DRAFT_STORE_PREFIX + id)
    if (!raw) return null
    try {
      return JSON.parse(raw) as TurnPayload[]
    } catch {
      return null
    }
  }

  private clearSavedDraft(id: string): void {
    window.localStorage.removeItem(DRAFT_STORE_PREFIX + id)
  }
}

function connectionSettings(): { service: string; annotator: string } {
  const params = new URLSearchParams(window.location.search)
  const service =
    params.get('service') ??
    window.prompt('Curation service URL', 'http://localhost:8800') ??
    'http://localhost:8800'
  const annotator =
    params.get('annotator') ?? window.prompt('Your reviewer id') ?? ''
  return { service, annotator }
}

const mount = document.getElementById('app')
if (mount) {
  const { service, annotator } = connectionSettings()
  if (!annotator) {
    mount.textContent = 'a reviewer id is required'
  } else {
    void new WorkbenchApp(mount, new WorkbenchApi(service, annotator)).start()
  }
}
