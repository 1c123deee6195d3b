/**
 * Annotation form state and validation.
 *
 * Validation mirrors the server's rules exactly so bad submissions are
 * blocked inline before any POST: a label must be chosen, non-scam needs
 * a descriptive note, and scam/potential need at least one broad
 * criterion, narrow criterion, and modality.
 */

import type { AnnotationLabel, AnnotationPayload, FieldErrors } from './types'

export interface AnnotationFormState {
  label: AnnotationLabel | null
  agreesWithGroundTruth: boolean
  broad: Set<string>
  narrow: Set<string>
  modalities: Set<string>
  note: string
}

export function emptyForm(): AnnotationFormState {
  return {
    label: null,
    agreesWithGroundTruth: true,
    broad: new Set(),
    narrow: new Set(),
    modalities: new Set(),
    note: '',
  }
}

export function toggle(set: Set<string>, id: string): Set<string> {
  const next = new Set(set)
  if (next.has(id)) next.delete(id)
  else next.add(id)
  return next
}

export function validateForm(state: AnnotationFormState): FieldErrors {
  const errors: FieldErrors = {}
  if (state.label === null) {
    errors.label = 'choose a label before submitting'
    return errors
  }
  if (state.label === 'nonscam') {
    if (!state.note.trim()) {
      errors.note = 'non-scam annotations require a descriptive note'
    }
  } else {
    if (state.broad.size === 0) errors.broad = 'required unless label is nonscam'
    if (state.narrow.size === 0) errors.narrow = 'required unless label is nonscam'
    if (state.modalities.size === 0) errors.modalities = 'required unless label is nonscam'
  }
  return errors
}

export function canSubmit(state: AnnotationFormState): boolean {
  return Object.keys(validateForm(state)).length === 0
}

export function toPayload(
  state: AnnotationFormState,
  requestId: string,
  sessionNo: number,
  annotatorId: string,
  videoId: string,
): AnnotationPayload {
  if (state.label === null) throw new Error('cannot build payload without a label')
  return {
    request_id: requestId,
    session_no: sessionNo,
    annotator_id: annotatorId,
    video_id: videoId,
    label: state.label,
    agrees_with_ground_truth: state.agreesWithGroundTruth,
    broad: [...state.broad].sort(),
    narrow: [...state.narrow].sort(),
    modalities: [...state.modalities].sort(),
    note: state.note,
  }
}
