/**
 * Batch annotation workflow: step through a session's videos in order,
 * submit one annotation per video, and resume after reload at the first
 * unannotated video. Progress is whatever the server has persisted; the
 * controller keeps no state the API cannot reconstruct.
 */

import { newRequestId, WorkbenchClient } from './api'
import { toPayload, validateForm, type AnnotationFormState } from './formState'
import type { FieldErrors, SessionSummary } from './types'

export class ClientValidationError extends Error {
  constructor(readonly fieldErrors: FieldErrors) {
    super(`validation failed: ${Object.keys(fieldErrors).join(', ')}`)
  }
}

export class BatchFlow {
  private session: SessionSummary | null = null
  private done = new Set<string>()

  constructor(
    readonly client: WorkbenchClient,
    readonly sessionNo: number,
    readonly annotatorId: string,
  ) {}

  /** Fetch the batch and previously submitted annotations (resume point). */
  async load(): Promise<void> {
    const batches = await this.client.listBatches()
    const session = batches.find((b) => b.session_no === this.sessionNo)
    if (!session) throw new Error(`unknown session ${this.sessionNo}`)
    this.session = session
    const mine = await this.client.getAnnotations(this.sessionNo, this.annotatorId)
    this.done = new Set(mine.map((a) => a.video_id))
  }

  batch(): string[] {
    if (!this.session) throw new Error('call load() first')
    return this.session.batch
  }

  /** First unannotated video in batch order, or null when complete. */
  currentVideoId(): string | null {
    return this.batch().find((vid) => !this.done.has(vid)) ?? null
  }

  isComplete(): boolean {
    return this.currentVideoId() === null
  }

  progress(): { done: number; total: number } {
    return { done: this.done.size, total: this.batch().length }
  }

  /**
   * Validate client-side, then submit the current video's annotation.
   * Invalid forms throw ClientValidationError without any POST.
   */
  async submitCurrent(form: AnnotationFormState): Promise<string | null> {
    const videoId = this.currentVideoId()
    if (videoId === null) throw new Error('batch already complete')
    const errors = validateForm(form)
    if (Object.keys(errors).length > 0) {
      throw new ClientValidationError(errors)
    }
    const payload = toPayload(form, newRequestId(), this.sessionNo, this.annotatorId, videoId)
    await this.client.submitAnnotation(payload)
    this.done.add(videoId)
    return this.currentVideoId()
  }
}
