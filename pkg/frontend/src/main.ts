/**
 * Browser entry point. Hash routes:
 *   #/batch/<session>?annotator=<id>   annotation workflow
 *   #/dashboard/<session>              agreement dashboard
 *   #/review/<video_id>                prediction review
 */

import { WorkbenchClient } from './api'
import { dashboardRows } from './agreement'
import { BatchFlow, ClientValidationError } from './batchFlow'
import { emptyForm, toggle, validateForm, type AnnotationFormState } from './formState'
import {
  renderAnnotationForm,
  renderDashboard,
  renderProgress,
  renderReview,
  renderVideoPanel,
} from './render'
import { highlightCriteria } from './review'
import type { FieldErrors } from './types'

const client = new WorkbenchClient('')

function app(): HTMLElement {
  const el = document.getElementById('app')
  if (!el) throw new Error('missing #app mount point')
  return el
}

async function showBatch(sessionNo: number, annotatorId: string): Promise<void> {
  const flow = new BatchFlow(client, sessionNo, annotatorId)
  await flow.load()
  const schema = await client.getCriteria()
  let form: AnnotationFormState = emptyForm()
  let errors: FieldErrors = {}

  const draw = async () => {
    const videoId = flow.currentVideoId()
    if (videoId === null) {
      app().innerHTML = `<p class="done">Batch complete.</p>`
      return
    }
    const video = await client.getVideo(videoId)
    const { done, total } = flow.progress()
    app().innerHTML = [
      renderProgress(done, total),
      renderVideoPanel(video.video, video.media_url),
      renderAnnotationForm(form, schema, errors),
    ].join('\n')
    wire()
  }

  const wire = () => {
    app()
      .querySelectorAll<HTMLInputElement>('input[name="label"]')
      .forEach((input) =>
        input.addEventListener('change', () => {
          form = { ...form, label: input.value as AnnotationFormState['label'] }
          void draw()
        }),
      )
    app()
      .querySelectorAll<HTMLInputElement>('input[data-group]')
      .forEach((input) =>
        input.addEventListener('change', () => {
          const group = input.dataset.group as 'broad' | 'narrow' | 'modalities'
          form = { ...form, [group]: toggle(form[group], input.dataset.id ?? '') }
          void draw()
        }),
      )
    const note = app().querySelector<HTMLTextAreaElement>('textarea.note')
    note?.addEventListener('input', () => {
      form = { ...form, note: note.value }
    })
    const formEl = app().querySelector('form.annotation-form')
    formEl?.addEventListener('submit', (event) => {
      event.preventDefault()
      void (async () => {
        errors = validateForm(form)
        if (Object.keys(errors).length > 0) {
          await draw()
          return
        }
        try {
          await flow.submitCurrent(form)
          form = emptyForm()
          errors = {}
        } catch (err) {
          if (err instanceof ClientValidationError) errors = err.fieldErrors
          else throw err
        }
        await draw()
      })()
    })
  }

  await draw()
}

async function showDashboard(sessionNo: number): Promise<void> {
  const agreement = await client.getAgreement(sessionNo)
  app().innerHTML = renderDashboard(
    dashboardRows(agreement),
    agreement.n_items,
    agreement.n_annotators,
  )
}

async function showReview(videoId: string): Promise<void> {
  const [video, prediction, schema] = await Promise.all([
    client.getVideo(videoId),
    client.getPrediction(videoId),
    client.getCriteria(),
  ])
  const relevant = schema.broad.filter((c) => prediction.criteria.includes(c.id))
  const highlighted = highlightCriteria(prediction.reasoning, relevant)
  app().innerHTML = renderReview(video.video, prediction, highlighted.html)
  app()
    .querySelectorAll<HTMLButtonElement>('button[data-verdict]')
    .forEach((button) =>
      button.addEventListener('click', () => {
        const note = app().querySelector<HTMLTextAreaElement>('.verdict-note')?.value ?? ''
        void client
          .postReviewVerdict(videoId, button.dataset.verdict as 'confirm' | 'override', note, 'reviewer')
          .then(() => {
            button.classList.add('posted')
          })
      }),
    )
}

async function route(): Promise<void> {
  const hash = window.location.hash.replace(/^#\//, '')
  const [page, arg] = hash.split('/')
  const params = new URLSearchParams(hash.split('?')[1] ?? '')
  try {
    if (page === 'batch') {
      await showBatch(Number(arg.split('?')[0]), params.get('annotator') ?? 'annotator-1')
    } else if (page === 'dashboard') {
      await showDashboard(Number(arg))
    } else if (page === 'review') {
      await showReview(arg)
    } else {
      const batches = await client.listBatches()
      app().innerHTML =
        '<ul>' +
        batches
          .map(
            (b) =>
              `<li><a href="#/batch/${b.session_no}">Session ${b.session_no}</a> ` +
              `(${b.size} videos) · <a href="#/dashboard/${b.session_no}">agreement</a></li>`,
          )
          .join('') +
        '</ul>'
    }
  } catch (err) {
    app().innerHTML = `<p class="error">${String(err)}</p>`
  }
}

window.addEventListener('hashchange', () => void route())
window.addEventListener('DOMContentLoaded', () => void route())
