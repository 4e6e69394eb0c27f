// Protocol-1 wire types, mirrored from docs/formats.md. The client never
// derives statuses, opacity, ratios, or window logic on its own — these
// shapes are rendered verbatim.

export type QuestionStatus = 'unvisited' | 'ongoing' | 'visited'

export interface QuestionView {
  id: string
  kind: 'main' | 'sub'
  text: string
  status: QuestionStatus
  status_source: 'auto' | 'manual' | null
}

export interface StageView {
  name: string
  intro: string
  questions: QuestionView[]
}

export interface ScriptView {
  research_question: string
  stages: StageView[]
}

export interface StageTimerView {
  name: string
  elapsed: number
  interviewer_seconds: number
  interviewee_seconds: number
  interviewer_share: number | null
}

export interface TimerView {
  overall_elapsed: number
  planned_minutes: number
  current_stage: string | null
  stages: StageTimerView[]
}

export interface TagView {
  id: string
  question_id: string | null
  kind: 'manual' | 'summary' | 'suggestion'
  text: string
  created_at: number
  over_limit: boolean
  source_request: string | null
  situation_code: string | null
  expansion: string | null
}

export interface Snapshot {
  protocol: number
  now: number
  script: ScriptView
  ongoing_opacity: number
  suspended_until: number | null
  timer: TimerView
  tags: TagView[]
  pending_suggestions: number
  config: Record<string, unknown>
}

export type ServerMessage =
  | { type: 'snapshot'; protocol: number; state: Snapshot }
  | { type: 'suggestion'; event: { kind: string; t: number; payload: { tag: TagView } } }
  | { type: 'error'; message: string }

export type ClientMessage =
  | { type: 'hello'; client_id: string; t?: number }
  | { type: 'segment'; t: number; start: number; end: number; speaker: string; text: string; final: boolean }
  | { type: 'manual_select'; t: number; question_id: string }
  | { type: 'reorder'; t: number; question_id: string; new_index: number }
  | { type: 'create_tag'; t: number; question_id: string | null; text: string }
  | { type: 'delete_tag'; t: number; tag_id: string }
  | { type: 'request_summary'; t: number }
  | { type: 'hover_expand'; t: number; tag_id: string }
  | { type: 'pause'; t: number }
  | { type: 'timer_tick'; t: number }
