import { describe, expect, it } from 'vitest'

import { ActiveTimer } from '../src/timer.js'

function clock(start = 0) {
  let t = start
  return {
    now: () => t,
    advance: (dt: number) => {
      t += dt
    },
  }
}

describe('ActiveTimer', () => {
  it('counts nothing before start', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    c.advance(50)
    expect(timer.seconds()).toBe(0)
  })

  it('counts while started, visible, and focused', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    timer.start()
    c.advance(30)
    timer.touch()
    c.advance(10)
    expect(timer.seconds()).toBe(40)
  })

  it('pauses on blur and resumes on focus', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    timer.start()
    c.advance(20)
    timer.touch()
    timer.setFocused(false)
    c.advance(100)
    expect(timer.seconds()).toBe(20)
    timer.setFocused(true)
    c.advance(5)
    expect(timer.seconds()).toBe(25)
  })

  it('pauses while the tab is hidden', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    timer.start()
    c.advance(10)
    timer.touch()
    timer.setVisible(false)
    c.advance(300)
    timer.setVisible(true)
    c.advance(10)
    timer.touch()
    expect(timer.seconds()).toBe(20)
  })

  it('clips idle stretches at the cutoff', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now, idleAfterSeconds: 60 })
    timer.start()
    c.advance(10)
    timer.touch()
    c.advance(500) // reviewer wandered off with the tab focused
    expect(timer.seconds()).toBe(10 + 60)
    timer.touch() // back at the keyboard: counting restarts from here
    c.advance(15)
    expect(timer.seconds()).toBe(10 + 60 + 15)
  })

  it('stop freezes and returns the total', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    timer.start()
    c.advance(12)
    timer.touch()
    const total = timer.stop()
    expect(total).toBe(12)
    c.advance(100)
    expect(timer.seconds()).toBe(12)
  })

  it('touch while inactive is ignored', () => {
    const c = clock()
    const timer = new ActiveTimer({ now: c.now })
    timer.start()
    timer.setVisible(false)
    c.advance(40)
    timer.touch()
    timer.setVisible(true)
    c.advance(7)
    expect(timer.seconds()).toBe(7)
  })

  it('rejects a non-positive idle cutoff', () => {
    expect(() => new ActiveTimer({ idleAfterSeconds: 0 })).toThrow()
  })
})
