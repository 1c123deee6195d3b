/**
 * Prediction review: highlight the canonical criteria sentences quoted in
 * a model's reasoning. Matching mirrors the server's rule (lowercase,
 * punctuation stripped, word boundaries) and maps hits back to spans in
 * the original text, so the rendered reasoning shows exactly the
 * sentences the parser credited.
 */

import { escapeHtml } from './render'
import type { Criterion } from './types'

interface NormIndex {
  norm: string
  /** original index of each normalized character */
  map: number[]
}

const ALNUM = /[0-9a-z]/

function buildNormIndex(text: string): NormIndex {
  const chars: string[] = []
  const map: number[] = []
  let lastWasSeparator = true
  for (let i = 0; i < text.length; i++) {
    const ch = text[i].toLowerCase()
    if (ch.length === 1 && ALNUM.test(ch)) {
      chars.push(ch)
      map.push(i)
      lastWasSeparator = false
    } else if (!lastWasSeparator) {
      chars.push(' ')
      map.push(i)
      lastWasSeparator = true
    }
  }
  if (chars.length > 0 && chars[chars.length - 1] === ' ') {
    chars.pop()
    map.pop()
  }
  return { norm: chars.join(''), map }
}

export function normalizeText(text: string): string {
  return buildNormIndex(text).norm
}

export interface HighlightSpan {
  start: number
  end: number
  criterionId: string
}

export function findCriterionSpans(text: string, criterion: Criterion): HighlightSpan[] {
  const { norm, map } = buildNormIndex(text)
  const needle = normalizeText(criterion.text)
  if (!needle) return []
  const spans: HighlightSpan[] = []
  let from = 0
  for (;;) {
    const at = norm.indexOf(needle, from)
    if (at === -1) break
    const end = at + needle.length
    const boundedBefore = at === 0 || norm[at - 1] === ' '
    const boundedAfter = end === norm.length || norm[end] === ' '
    if (boundedBefore && boundedAfter) {
      spans.push({ start: map[at], end: map[end - 1] + 1, criterionId: criterion.id })
    }
    from = at + 1
  }
  return spans
}

export interface HighlightResult {
  html: string
  spanCount: number
  matchedIds: string[]
}

/**
 * Wrap every quoted criterion sentence in a <mark> span. Overlapping
 * matches keep the earliest span; reasoning quoting nothing (e.g. a
 * non-scam caption) comes back fully escaped with zero highlights.
 */
export function highlightCriteria(reasoning: string, criteria: Criterion[]): HighlightResult {
  const spans = criteria
    .flatMap((criterion) => findCriterionSpans(reasoning, criterion))
    .sort((a, b) => a.start - b.start || b.end - a.end)
  const kept: HighlightSpan[] = []
  let cursor = 0
  for (const span of spans) {
    if (span.start >= cursor) {
      kept.push(span)
      cursor = span.end
    }
  }
  const parts: string[] = []
  let at = 0
  for (const span of kept) {
    parts.push(escapeHtml(reasoning.slice(at, span.start)))
    parts.push(
      `<mark class="criterion-span" data-criterion="${span.criterionId}">` +
        escapeHtml(reasoning.slice(span.start, span.end)) +
        '</mark>',
    )
    at = span.end
  }
  parts.push(escapeHtml(reasoning.slice(at)))
  return {
    html: parts.join(''),
    spanCount: kept.length,
    matchedIds: [...new Set(kept.map((s) => s.criterionId))].sort(),
  }
}
