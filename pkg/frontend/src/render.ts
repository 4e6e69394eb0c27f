// Pure view-model rendering. Each function maps the latest snapshot plus
// transient local state (hover, drag, pending spinner) to a plain render
// tree; there is no DOM dependency so the trees are directly assertable.

import type { QuestionStatus, Snapshot, TagView } from './types.js'

export interface Transient {
  stale: boolean
  hoveredTagId: string | null
  draggingQuestionId: string | null
  summaryPending: boolean
}

export const freshTransient = (): Transient => ({
  stale: false,
  hoveredTagId: null,
  draggingQuestionId: null,
  summaryPending: false,
})

export interface ViewModel {
  snapshot: Snapshot
  transient: Transient
}

// Fig-style palette: ongoing yellow, visited gray, unvisited blue.
export const STATUS_COLORS: Record<QuestionStatus, string> = {
  ongoing: '#f2c94c',
  visited: '#9b9b9b',
  unvisited: '#5b8dd9',
}

// Interviewer dominating the conversation flips the ratio band color.
export const SHARE_EMPHASIS_THRESHOLD = 0.5
export const BAND_NEUTRAL = '#7fb285'
export const BAND_EMPHASIS = '#d9665b'

export const SITUATION_ICONS: Record<string, string> = {
  '1.1': 'probe-clarify',
  '1.2': 'probe-hesitation',
  '2.1': 'followup-concept',
  '2.2': 'followup-inconsistency',
}

export interface QuestionNode {
  id: string
  kind: 'main' | 'sub'
  text: string
  color: string
  // ongoing highlight alpha is the server-provided opacity, verbatim;
  // other statuses render fully opaque
  highlightAlpha: number
  dragging: boolean
}

export interface ScriptPanel {
  researchQuestion: string
  stale: boolean
  stages: { name: string; intro: string; questions: QuestionNode[] }[]
}

export function renderScript(vm: ViewModel): ScriptPanel {
  const { snapshot, transient } = vm
  return {
    researchQuestion: snapshot.script.research_question,
    stale: transient.stale,
    stages: snapshot.script.stages.map((stage) => ({
      name: stage.name,
      intro: stage.intro,
      questions: stage.questions.map((q) => ({
        id: q.id,
        kind: q.kind,
        text: q.text,
        color: STATUS_COLORS[q.status],
        highlightAlpha: q.status === 'ongoing' ? snapshot.ongoing_opacity : 1,
        dragging: transient.draggingQuestionId === q.id,
      })),
    })),
  }
}

export interface StageBar {
  name: string
  elapsedSeconds: number
  fraction: number // of overall elapsed; 0 when nothing has elapsed
  current: boolean
  band: { share: number; color: string } | null
}

export interface TimerStrip {
  overallElapsed: number
  plannedMinutes: number
  bars: StageBar[]
}

export function renderTimer(vm: ViewModel): TimerStrip {
  const timer = vm.snapshot.timer
  const overall = timer.overall_elapsed
  return {
    overallElapsed: overall,
    plannedMinutes: timer.planned_minutes,
    bars: timer.stages.map((s) => ({
      name: s.name,
      elapsedSeconds: s.elapsed,
      fraction: overall > 0 ? s.elapsed / overall : 0,
      current: s.name === timer.current_stage,
      band:
        s.interviewer_share === null
          ? null // no attributed speech yet: band hidden
          : {
              share: s.interviewer_share,
              color:
                s.interviewer_share > SHARE_EMPHASIS_THRESHOLD
                  ? BAND_EMPHASIS
                  : BAND_NEUTRAL,
            },
    })),
  }
}

export interface TagNode {
  id: string
  kind: TagView['kind']
  text: string
  overLimitFlag: boolean
  icon: string | null
  expansion: string | null // shown only while hovered and present
}

export interface CapturePanel {
  summaryPending: boolean
  tags: TagNode[]
}

export function renderCapture(vm: ViewModel): CapturePanel {
  const { snapshot, transient } = vm
  return {
    summaryPending: transient.summaryPending,
    tags: snapshot.tags.map((t) => ({
      id: t.id,
      kind: t.kind,
      text: t.text,
      overLimitFlag: t.over_limit,
      icon: t.situation_code ? (SITUATION_ICONS[t.situation_code] ?? null) : null,
      expansion:
        transient.hoveredTagId === t.id && t.expansion ? t.expansion : null,
    })),
  }
}
