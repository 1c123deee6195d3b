/**
 * Typed client for the annotation API. Every mutation carries a
 * client-generated request id so retries are idempotent server-side.
 */

import type {
  AgreementPayload,
  AnnotationPayload,
  AnnotationRecord,
  CriteriaSchema,
  Prediction,
  ReviewVerdict,
  SessionSummary,
  VideoResponse,
} from './types'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`)
  }
}

export function newRequestId(): string {
  return globalThis.crypto.randomUUID()
}

export class WorkbenchClient {
  constructor(
    readonly baseUrl: string,
    readonly token?: string,
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' }
    if (this.token) headers['X-Auth-Token'] = this.token
    return headers
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    })
    const payload = await response.json().catch(() => null)
    if (!response.ok) {
      throw new ApiError(response.status, payload?.detail ?? payload)
    }
    return payload as T
  }

  async getCriteria(): Promise<CriteriaSchema> {
    const body = await this.request<{ criteria: CriteriaSchema }>('GET', '/v1/criteria')
    return body.criteria
  }

  async listBatches(): Promise<SessionSummary[]> {
    const body = await this.request<{ batches: SessionSummary[] }>('GET', '/v1/batches')
    return body.batches
  }

  async createBatch(
    size: number,
    composition: string,
    seed: number,
    label?: string,
  ): Promise<SessionSummary> {
    const body = await this.request<{ session: SessionSummary }>('POST', '/v1/batches', {
      size,
      composition,
      seed,
      label: label ?? null,
    })
    return body.session
  }

  async getVideo(videoId: string): Promise<VideoResponse> {
    return this.request<VideoResponse>('GET', `/v1/videos/${encodeURIComponent(videoId)}`)
  }

  async submitAnnotation(payload: AnnotationPayload): Promise<unknown> {
    return this.request('POST', '/v1/annotations', payload)
  }

  async getAnnotations(sessionNo: number, annotatorId?: string): Promise<AnnotationRecord[]> {
    const query = annotatorId
      ? `?session_no=${sessionNo}&annotator_id=${encodeURIComponent(annotatorId)}`
      : `?session_no=${sessionNo}`
    const body = await this.request<{ annotations: AnnotationRecord[] }>(
      'GET',
      `/v1/annotations${query}`,
    )
    return body.annotations
  }

  async getAgreement(sessionNo: number): Promise<AgreementPayload> {
    const body = await this.request<{ agreement: AgreementPayload }>(
      'GET',
      `/v1/agreement/${sessionNo}`,
    )
    return body.agreement
  }

  async getPrediction(videoId: string): Promise<Prediction> {
    const body = await this.request<{ prediction: Prediction }>(
      'GET',
      `/v1/predictions/${encodeURIComponent(videoId)}`,
    )
    return body.prediction
  }

  async postReviewVerdict(
    videoId: string,
    verdict: 'confirm' | 'override',
    note: string,
    reviewerId: string,
  ): Promise<ReviewVerdict> {
    const body = await this.request<{ review_verdict: ReviewVerdict }>(
      'POST',
      '/v1/review-verdicts',
      {
        request_id: newRequestId(),
        video_id: videoId,
        verdict,
        note,
        reviewer_id: reviewerId,
      },
    )
    return body.review_verdict
  }

  async getReviewVerdict(videoId: string): Promise<ReviewVerdict> {
    const body = await this.request<{ review_verdict: ReviewVerdict }>(
      'GET',
      `/v1/review-verdicts/${encodeURIComponent(videoId)}`,
    )
    return body.review_verdict
  }
}
