/**
 * Agreement dashboard model. Values come from the API's preformatted
 * display strings verbatim (no client-side recomputation); columns whose
 * alpha is not computable arrive as "-". The 0.8 threshold marks the
 * stopping rule.
 */

import type { AgreementPayload } from './types'

export const ALPHA_THRESHOLD = 0.8

export const COLUMN_ORDER = ['agrees_with_gt', 'label', 'broad', 'narrow', 'modality'] as const

export const COLUMN_LABELS: Record<(typeof COLUMN_ORDER)[number], string> = {
  agrees_with_gt: 'Agree with Ground Truth?',
  label: 'Label (Scam, Non scam, Potential Scam)',
  broad: 'Broad Scam Criteria',
  narrow: 'Narrow Scam Criteria',
  modality: 'Modality',
}

export interface DashboardRow {
  column: string
  label: string
  /** display string exactly as the API returned it */
  value: string
  highlighted: boolean
}

export function dashboardRows(agreement: AgreementPayload): DashboardRow[] {
  return COLUMN_ORDER.map((column) => {
    const alpha = agreement.alpha[column]
    return {
      column,
      label: COLUMN_LABELS[column],
      value: agreement.display[column],
      highlighted: alpha !== null && alpha !== undefined && alpha > ALPHA_THRESHOLD,
    }
  })
}
