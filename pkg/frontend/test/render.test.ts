import { readFileSync } from 'node:fs'
import { fileURLToPath } from 'node:url'
import { describe, expect, it } from 'vitest'

import {
  BAND_EMPHASIS,
  BAND_NEUTRAL,
  STATUS_COLORS,
  freshTransient,
  renderCapture,
  renderScript,
  renderTimer,
  type ViewModel,
} from '../src/render.js'
import type { Snapshot } from '../src/types.js'

const fixturePath = fileURLToPath(new URL('./fixtures/snapshot.json', import.meta.url))
const snapshot: Snapshot = JSON.parse(readFileSync(fixturePath, 'utf8'))

const vm = (overrides: Partial<Snapshot> = {}, transient = freshTransient()): ViewModel => ({
  snapshot: { ...snapshot, ...overrides },
  transient,
})

describe('renderScript', () => {
  it('colors every question by its snapshot status', () => {
    const panel = renderScript(vm())
    for (const [i, stage] of panel.stages.entries()) {
      for (const [j, q] of stage.questions.entries()) {
        const source = snapshot.script.stages[i]!.questions[j]!
        expect(q.color).toBe(STATUS_COLORS[source.status])
      }
    }
    const all = panel.stages.flatMap((s) => s.questions)
    expect(all.some((q) => q.color === STATUS_COLORS.ongoing)).toBe(true)
    expect(all.some((q) => q.color === STATUS_COLORS.unvisited)).toBe(true)
  })

  it('uses the server opacity verbatim as the ongoing highlight alpha', () => {
    const panel = renderScript(vm({ ongoing_opacity: 0.64 }))
    const ongoingIds = new Set(
      snapshot.script.stages.flatMap((s) =>
        s.questions.filter((q) => q.status === 'ongoing').map((q) => q.id),
      ),
    )
    for (const q of panel.stages.flatMap((s) => s.questions)) {
      expect(q.highlightAlpha).toBe(ongoingIds.has(q.id) ? 0.64 : 1)
    }
  })

  it('marks the panel stale after disconnect without dropping content', () => {
    const t = freshTransient()
    t.stale = true
    const panel = renderScript(vm({}, t))
    expect(panel.stale).toBe(true)
    expect(panel.stages.length).toBe(snapshot.script.stages.length)
  })

  it('is pure: same inputs, same tree', () => {
    expect(renderScript(vm())).toEqual(renderScript(vm()))
  })
})

describe('renderTimer', () => {
  it('renders per-stage elapsed verbatim and flags the current stage', () => {
    const strip = renderTimer(vm())
    expect(strip.bars.map((b) => b.elapsedSeconds)).toEqual(
      snapshot.timer.stages.map((s) => s.elapsed),
    )
    const current = strip.bars.filter((b) => b.current)
    expect(current.map((b) => b.name)).toEqual(
      snapshot.timer.current_stage === null ? [] : [snapshot.timer.current_stage],
    )
  })

  it('shows a skewed bar when one stage ate the session', () => {
    const strip = renderTimer(
      vm({
        timer: {
          ...snapshot.timer,
          overall_elapsed: 760,
          stages: [
            { name: 'A', elapsed: 750, interviewer_seconds: 0, interviewee_seconds: 700, interviewer_share: 0 },
            { name: 'B', elapsed: 10, interviewer_seconds: 0, interviewee_seconds: 0, interviewer_share: null },
            { name: 'C', elapsed: 0, interviewer_seconds: 0, interviewee_seconds: 0, interviewer_share: null },
          ],
        },
      }),
    )
    expect(strip.bars[0]!.fraction).toBeCloseTo(750 / 760, 12)
    expect(strip.bars[2]!.fraction).toBe(0)
  })

  it('hides the ratio band before any attributed speech', () => {
    const silent = {
      ...snapshot.timer,
      stages: snapshot.timer.stages.map((s) => ({ ...s, interviewer_share: null })),
    }
    const strip = renderTimer(vm({ timer: silent }))
    expect(strip.bars.every((b) => b.band === null)).toBe(true)
  })

  it('flips the band color when the interviewer share exceeds one half', () => {
    const loud = {
      ...snapshot.timer,
      stages: [
        { ...snapshot.timer.stages[0]!, interviewer_share: 0.3 },
        { ...snapshot.timer.stages[1]!, interviewer_share: 0.72 },
      ],
    }
    const strip = renderTimer(vm({ timer: loud }))
    expect(strip.bars[0]!.band).toEqual({ share: 0.3, color: BAND_NEUTRAL })
    expect(strip.bars[1]!.band).toEqual({ share: 0.72, color: BAND_EMPHASIS })
  })
})

describe('renderCapture', () => {
  it('renders summary tags within the limit without a flag', () => {
    const panel = renderCapture(vm())
    const summary = panel.tags.find((t) => t.kind === 'summary')
    expect(summary).toBeDefined()
    expect(summary!.text.split(/\s+/).length).toBeLessThanOrEqual(7)
    expect(summary!.overLimitFlag).toBe(false)
  })

  it('flags over-limit summaries instead of truncating them', () => {
    const long = 'one two three four five six seven eight nine'
    const tags = snapshot.tags.map((t) =>
      t.kind === 'summary' ? { ...t, text: long, over_limit: true } : t,
    )
    const panel = renderCapture(vm({ tags }))
    const summary = panel.tags.find((t) => t.kind === 'summary')!
    expect(summary.text).toBe(long)
    expect(summary.overLimitFlag).toBe(true)
  })

  it('gives suggestion tags a situation icon', () => {
    const panel = renderCapture(vm())
    const suggestion = panel.tags.find((t) => t.kind === 'suggestion')!
    expect(suggestion.icon).toBe('probe-hesitation')
  })

  it('shows the expansion only while its tag is hovered', () => {
    const tags = snapshot.tags.map((t) =>
      t.kind === 'suggestion' ? { ...t, expansion: 'ask for a concrete example' } : t,
    )
    const suggestionId = tags.find((t) => t.kind === 'suggestion')!.id
    expect(
      renderCapture(vm({ tags })).tags.find((t) => t.id === suggestionId)!.expansion,
    ).toBeNull()
    const hovering = freshTransient()
    hovering.hoveredTagId = suggestionId
    expect(
      renderCapture(vm({ tags }, hovering)).tags.find((t) => t.id === suggestionId)!
        .expansion,
    ).toBe('ask for a concrete example')
  })

  it('surfaces the pending spinner from transient state only', () => {
    const pending = freshTransient()
    pending.summaryPending = true
    expect(renderCapture(vm({}, pending)).summaryPending).toBe(true)
    expect(renderCapture(vm()).summaryPending).toBe(false)
  })
})
