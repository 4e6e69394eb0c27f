// Every user gesture maps to exactly one protocol message; replaying the
// emitted messages against the engine reproduces the session.

import type { ClientMessage } from './types.js'

export type Gesture =
  | { kind: 'click_question'; questionId: string }
  | { kind: 'drop_question'; questionId: string; newIndex: number }
  | { kind: 'submit_tag'; questionId: string | null; text: string }
  | { kind: 'delete_tag'; tagId: string }
  | { kind: 'click_summarize' }
  | { kind: 'hover_tag'; tagId: string }

export function gestureToMessage(g: Gesture, t: number): ClientMessage {
  switch (g.kind) {
    case 'click_question':
      return { type: 'manual_select', t, question_id: g.questionId }
    case 'drop_question':
      return { type: 'reorder', t, question_id: g.questionId, new_index: g.newIndex }
    case 'submit_tag':
      return { type: 'create_tag', t, question_id: g.questionId, text: g.text }
    case 'delete_tag':
      return { type: 'delete_tag', t, tag_id: g.tagId }
    case 'click_summarize':
      return { type: 'request_summary', t }
    case 'hover_tag':
      return { type: 'hover_expand', t, tag_id: g.tagId }
  }
}
