/** JSON shapes exchanged with the curation service. */

export type Source = 'H' | 'H+LLM' | 'LLM'

export type TaskState = 'pending' | 'in_progress' | 'done' | 'dialogue_deleted'

export interface TurnPayload {
  speaker: string
  text: string
}

export interface DialoguePayload {
  id: string
  source: Source
  turns: TurnPayload[]
  provenance?: Record<string, unknown>
  deleted?: boolean
}

/** One row of GET /tasks (list rows also carry source and turn_count). */
export interface TaskRow {
  dialogue_id: string
  state: TaskState
  assignee: string | null
  version: number
  seconds: number
  source?: Source
  turn_count?: number
}

/** GET /tasks/{id}: the row plus original, current draft, and edit record. */
export interface TaskDetail {
  task: TaskRow
  original: DialoguePayload
  draft: DialoguePayload | null
  record: Record<string, unknown> | null
}

export interface Violation {
  rule: string
  turn_index: number | null
  message: string
}

export interface RuleInfo {
  id: string
  description: string
}

export interface HterGolden {
  original: string
  postedited: string
  hter: number
}

export interface ValidationCase {
  name: string
  original: DialoguePayload
  draft: TurnPayload[]
  violations: string[]
}

/** GET /rules: rule manifest plus the shared cross-implementation fixtures. */
export interface RulesManifest {
  rules: RuleInfo[]
  hter_goldens: HterGolden[]
  validation_cases: ValidationCase[]
}

export interface SubmissionBody {
  base_version: number
  seconds: number
  turns: TurnPayload[]
}
