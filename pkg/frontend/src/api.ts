/**
 * Typed client for the curation service HTTP API. Every write carries
 * the reviewer identity in the X-Annotator header and the task version
 * it was based on; the error classes below mirror the server's answers
 * so the UI can react precisely (reload on conflict, inline rule flags
 * on rejection, keep-the-draft on transport failure).
 */

import type {
  RulesManifest,
  SubmissionBody,
  TaskDetail,
  TaskRow,
  TaskState,
  Violation,
} from './types.js'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

/** 409: someone else moved the task; reload before retrying. */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message)
    this.name = 'ConflictError'
  }
}

/** 422: the draft violates guideline rules; nothing was written. */
export class RejectedError extends ApiError {
  constructor(readonly violations: Violation[]) {
    super(422, `submission violates: ${violations.map((v) => v.rule).join(', ')}`)
    this.name = 'RejectedError'
  }
}

/** The request never reached the service; the local draft is still good. */
export class TransportError extends Error {
  constructor(message: string, readonly cause?: unknown) {
    super(message)
    this.name = 'TransportError'
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class WorkbenchApi {
  private readonly base: string

  constructor(
    baseUrl: string,
    readonly annotator: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {
    this.base = baseUrl.replace(/\/+$/, '')
    if (!annotator.trim()) throw new Error('annotator id is blank')
  }

  private taskUrl(dialogueId: string, suffix = ''): string {
    // dialogue ids routinely contain '#' (file#scene#start), which a raw
    // URL would truncate as a fragment
    return `${this.base}/tasks/${encodeURIComponent(dialogueId)}${suffix}`
  }

  private async request(url: string, init: RequestInit = {}): Promise<Response> {
    let response: Response
    try {
      response = await this.fetchFn(url, init)
    } catch (cause) {
      throw new TransportError(`cannot reach ${url}`, cause)
    }
    if (response.ok) return response
    const detail = await this.errorDetail(response)
    if (response.status === 409) {
      throw new ConflictError(typeof detail === 'string' ? detail : 'version conflict')
    }
    if (response.status === 422 && detail && typeof detail === 'object') {
      const body = detail as { violations?: Violation[] }
      if (Array.isArray(body.violations)) throw new RejectedError(body.violations)
    }
    const message = typeof detail === 'string' ? detail : JSON.stringify(detail)
    throw new ApiError(response.status, message || response.statusText)
  }

  private async errorDetail(response: Response): Promise<unknown> {
    try {
      const body = (await response.json()) as { detail?: unknown }
      return body.detail ?? body
    } catch {
      return response.statusText
    }
  }

  private writeHeaders(): Record<string, string> {
    return {
      'Content-Type': 'application/json',
      'X-Annotator': this.annotator,
    }
  }

  async listTasks(state?: TaskState): Promise<TaskRow[]> {
    const query = state ? `?state=${encodeURIComponent(state)}` : ''
    const response = await this.request(`${this.base}/tasks${query}`)
    const body = (await response.json()) as { tasks: TaskRow[] }
    return body.tasks
  }

  async getTask(dialogueId: string): Promise<TaskDetail> {
    const response = await this.request(this.taskUrl(dialogueId))
    return (await response.json()) as TaskDetail
  }

  async claim(dialogueId: string): Promise<TaskDetail> {
    const response = await this.request(this.taskUrl(dialogueId, '/claim'), {
      method: 'POST',
      headers: this.writeHeaders(),
    })
    return (await response.json()) as TaskDetail
  }

  async submit(dialogueId: string, body: SubmissionBody): Promise<TaskDetail> {
    const response = await this.request(this.taskUrl(dialogueId), {
      method: 'PUT',
      headers: this.writeHeaders(),
      body: JSON.stringify(body),
    })
    return (await response.json()) as TaskDetail
  }

  async deleteDialogue(
    dialogueId: string,
    baseVersion: number,
    seconds: number,
  ): Promise<TaskDetail> {
    const response = await this.request(this.taskUrl(dialogueId, '/delete'), {
      method: 'POST',
      headers: this.writeHeaders(),
      body: JSON.stringify({ base_version: baseVersion, seconds }),
    })
    return (await response.json()) as TaskDetail
  }

  async report(): Promise<Record<string, unknown>> {
    const response = await this.request(`${this.base}/report`)
    return (await response.json()) as Record<string, unknown>
  }

  async rules(): Promise<RulesManifest> {
    const response = await this.request(`${this.base}/rules`)
    return (await response.json()) as RulesManifest
  }

  /** The reviewed corpus as JSONL text, exactly as the service exports it. */
  async exportCorpus(): Promise<string> {
    const response = await this.request(`${this.base}/export`)
    return await response.text()
  }
}
