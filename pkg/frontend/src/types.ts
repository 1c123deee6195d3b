/**
 * Payload types mirroring the annotation API (all responses carry a
 * schema_version). The criteria schema is always fetched from the server,
 * never hard-coded, so the UI cannot drift from the canonical sentences.
 */

export type AnnotationLabel = 'scam' | 'nonscam' | 'potential'
export type ModalityId = 'text' | 'audio' | 'video'

export interface Criterion {
  id: string
  text: string
  example?: string
}

export interface CriteriaSchema {
  schema_version: number
  broad: Criterion[]
  narrow: Criterion[]
  modalities: ModalityId[]
}

export interface SessionSummary {
  session_no: number
  batch: string[]
  composition: string
  size: number
  completed_annotators: string[]
  annotated_counts: Record<string, number>
}

export interface VideoInfo {
  video_id: string
  source: string
  title: string
  description: string
  ground_truth: string
  effective_label: string
  duration_s: number
  available: boolean
}

export interface VideoResponse {
  schema_version: number
  video: VideoInfo
  media_url: string | null
  criteria: CriteriaSchema
}

export interface AnnotationPayload {
  request_id: string
  session_no: number
  annotator_id: string
  video_id: string
  label: AnnotationLabel
  agrees_with_ground_truth: boolean
  broad: string[]
  narrow: string[]
  modalities: string[]
  note: string
}

export interface AnnotationRecord {
  annotator_id: string
  video_id: string
  label: AnnotationLabel
  agrees_with_ground_truth: boolean
  broad: string[]
  narrow: string[]
  modalities: string[]
  note: string
}

export interface AgreementPayload {
  session_no: number
  n_items: number
  n_annotators: number
  alpha: Record<string, number | null>
  display: Record<string, string>
}

export interface Prediction {
  label: 'yes' | 'no'
  reasoning: string
  criteria: string[]
  latency_s: number
  peak_memory_gb: number | null
}

export interface ReviewVerdict {
  video_id: string
  verdict: 'confirm' | 'override'
  note: string
  reviewer_id: string
}

export interface FieldErrors {
  [field: string]: string
}
