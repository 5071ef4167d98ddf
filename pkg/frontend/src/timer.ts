/**
 * Editing timer that counts only time the reviewer plausibly spent on
 * the task: the tab must be visible and focused, and stretches with no
 * user activity are clipped at `idleAfterSeconds` past the last event.
 */

export interface TimerOptions {
  /** clock in seconds; injectable for tests (default: wall clock) */
  now?: () => number
  /** activity gap after which counting pauses (default 120 s) */
  idleAfterSeconds?: number
}

export class ActiveTimer {
  private readonly now: () => number
  private readonly idleAfter: number
  private accumulated = 0
  private stretchStart: number | null = null
  private lastActivity = 0
  private started = false
  private visible = true
  private focused = true

  constructor(options: TimerOptions = {}) {
    this.now = options.now ?? (() => Date.now() / 1000)
    this.idleAfter = options.idleAfterSeconds ?? 120
    if (this.idleAfter <= 0) throw new RangeError('idleAfterSeconds must be positive')
  }

  private get active(): boolean {
    return this.started && this.visible && this.focused
  }

  /** credited seconds of the current stretch, idle-clipped */
  private stretchSeconds(at: number): number {
    if (this.stretchStart === null) return 0
    const end = Math.min(at, this.lastActivity + this.idleAfter)
    return Math.max(0, end - this.stretchStart)
  }

  private update(activeBefore: boolean): void {
    const t = this.now()
    if (activeBefore && !this.active) {
      this.accumulated += this.stretchSeconds(t)
      this.stretchStart = null
    } else if (!activeBefore && this.active) {
      this.stretchStart = t
      this.lastActivity = t
    }
  }

  start(): void {
    const before = this.active
    this.started = true
    this.update(before)
  }

  setVisible(visible: boolean): void {
    const before = this.active
    this.visible = visible
    this.update(before)
  }

  setFocused(focused: boolean): void {
    const before = this.active
    this.focused = focused
    this.update(before)
  }

  /** Mark user activity (keystroke, click). Restarts counting after idle. */
  touch(): void {
    if (!this.active) return
    const t = this.now()
    if (t - this.lastActivity > this.idleAfter) {
      // the stretch went idle: credit it up to the cutoff, start fresh
      this.accumulated += this.stretchSeconds(t)
      this.stretchStart = t
    }
    this.lastActivity = t
  }

  seconds(): number {
    return this.accumulated + (this.active ? this.stretchSeconds(this.now()) : 0)
  }

  /** Stop counting and return the final total. */
  stop(): number {
    const before = this.active
    this.started = false
    this.update(before)
    return this.accumulated
  }

  reset(): void {
    this.accumulated = 0
    this.stretchStart = null
    this.started = false
  }
}
