/**
 * String-based view renderers. Keeping these DOM-free makes them directly
 * assertable in tests; main.ts injects the output into the page.
 */

import { ALPHA_THRESHOLD, type DashboardRow } from './agreement'
import { canSubmit, type AnnotationFormState } from './formState'
import type { CriteriaSchema, FieldErrors, Prediction, VideoInfo } from './types'

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;')
}

function checkbox(
  group: string,
  id: string,
  label: string,
  checked: boolean,
  tooltip?: string,
): string {
  const title = tooltip ? ` title="${escapeHtml(tooltip)}"` : ''
  return (
    `<label class="check"${title}>` +
    `<input type="checkbox" data-group="${group}" data-id="${escapeHtml(id)}"` +
    `${checked ? ' checked' : ''}> ${escapeHtml(id)}: ${escapeHtml(label)}</label>`
  )
}

export function renderAnnotationForm(
  state: AnnotationFormState,
  schema: CriteriaSchema,
  errors: FieldErrors = {},
): string {
  const labels = (['scam', 'nonscam', 'potential'] as const)
    .map(
      (value) =>
        `<label><input type="radio" name="label" value="${value}"` +
        `${state.label === value ? ' checked' : ''}> ${value}</label>`,
    )
    .join('\n')
  const broad = schema.broad
    .map((c) => checkbox('broad', c.id, c.text, state.broad.has(c.id), c.example))
    .join('\n')
  const narrow = schema.narrow
    .map((c) => checkbox('narrow', c.id, c.text, state.narrow.has(c.id)))
    .join('\n')
  const modalities = schema.modalities
    .map((m) => checkbox('modalities', m, m, state.modalities.has(m)))
    .join('\n')
  const errorList = Object.entries(errors)
    .map(([field, message]) => `<li class="field-error" data-field="${field}">${escapeHtml(message)}</li>`)
    .join('\n')
  return `
<form class="annotation-form">
  <fieldset class="labels">${labels}</fieldset>
  <fieldset class="broad">${broad}</fieldset>
  <fieldset class="narrow">${narrow}</fieldset>
  <fieldset class="modalities">${modalities}</fieldset>
  <label class="agrees"><input type="checkbox" data-id="agrees"${
    state.agreesWithGroundTruth ? ' checked' : ''
  }> Agree with ground truth?</label>
  <textarea class="note" placeholder="Required for non-scam">${escapeHtml(state.note)}</textarea>
  <ul class="errors">${errorList}</ul>
  <button type="submit"${canSubmit(state) ? '' : ' disabled'}>Submit</button>
</form>`.trim()
}

export function renderDashboard(rows: DashboardRow[], nItems: number, nAnnotators: number): string {
  const header = rows.map((r) => `<th>${escapeHtml(r.label)}</th>`).join('')
  const cells = rows
    .map(
      (r) =>
        `<td class="alpha${r.highlighted ? ' alpha-pass' : ''}" data-column="${r.column}">` +
        `${escapeHtml(r.value)}</td>`,
    )
    .join('')
  return `
<table class="agreement-dashboard">
  <caption>${nItems} videos, ${nAnnotators} annotators (threshold ${ALPHA_THRESHOLD})</caption>
  <thead><tr>${header}</tr></thead>
  <tbody><tr>${cells}</tr></tbody>
</table>`.trim()
}

export function renderVideoPanel(video: VideoInfo, mediaUrl: string | null): string {
  const player = mediaUrl
    ? `<video controls src="${escapeHtml(mediaUrl)}"></video>`
    : '<p class="no-media">media unavailable</p>'
  return `
<section class="video-panel" data-video="${escapeHtml(video.video_id)}">
  ${player}
  <h2>${escapeHtml(video.title)}</h2>
  <p class="description">${escapeHtml(video.description)}</p>
  <p class="meta">${escapeHtml(video.source)} · ${video.duration_s.toFixed(0)}s</p>
</section>`.trim()
}

export function renderProgress(done: number, total: number): string {
  return `<p class="progress">${done} / ${total} annotated</p>`
}

export function renderReview(
  video: VideoInfo,
  prediction: Prediction,
  highlightedReasoning: string,
  frameTimestamps: number[] = [],
): string {
  const strip = frameTimestamps
    .map((t) => `<span class="frame-tick" data-t="${t.toFixed(2)}"></span>`)
    .join('')
  return `
<section class="prediction-review" data-video="${escapeHtml(video.video_id)}">
  <h2>${escapeHtml(video.title)}</h2>
  <p class="predicted-label label-${prediction.label}">${
    prediction.label === 'yes' ? 'Scam' : 'Not a scam'
  }</p>
  <div class="reasoning">${highlightedReasoning}</div>
  <div class="frame-strip">${strip}</div>
  <div class="verdict-controls">
    <button data-verdict="confirm">Confirm</button>
    <button data-verdict="override">Override</button>
    <textarea class="verdict-note" placeholder="Reviewer note"></textarea>
  </div>
</section>`.trim()
}
