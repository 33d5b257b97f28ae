// HTML string builders. Everything here is a pure function of API data
// plus form state, so the tests can assert on exact output without a DOM.
// Code and documentation text pass through untouched apart from HTML
// escaping; the enclosing <pre><code> keeps the browser from eating a
// leading newline, so what the annotator sees is what the dataset holds.

import type { AgreementView, ProgressView, QueueEntry } from "./api.js";
import { escapeHtml, highlightJava } from "./highlight.js";
import { canSubmit, DecisionForm, REASON_LABELS, REASONS } from "./state.js";

export function renderQueueItem(entry: QueueEntry, index: number, total: number): string {
  const badges = entry.flags
    .map((flag) => `<span class="badge pii">${escapeHtml(flag)}</span>`)
    .join("");
  return [
    `<header class="item-head">`,
    `<span class="position">${index + 1} of ${total}</span>`,
    `<span class="entry-id">${escapeHtml(entry.id)}</span>`,
    `</header>`,
    `<p class="context-line">` +
      `<span class="pkg">${escapeHtml(entry.package)}</span>.` +
      `<span class="cls">${escapeHtml(entry.enclosing_class)}</span>` +
      ` <span class="kind">${escapeHtml(entry.kind)}</span>${badges}</p>`,
    `<div class="panes">`,
    `<pre class="pane code"><code>${highlightJava(entry.code)}</code></pre>`,
    `<pre class="pane doc"><code>${escapeHtml(entry.documentation)}</code></pre>`,
    `</div>`,
  ].join("\n");
}

export function renderForm(form: DecisionForm): string {
  const verdictButton = (verdict: string, key: string) => {
    const on = form.verdict === verdict ? " selected" : "";
    return (
      `<button type="button" class="verdict${on}" data-verdict="${verdict}">` +
      `${verdict} <kbd>${key}</kbd></button>`
    );
  };
  const reasons = REASONS.map((reason, i) => {
    const on = form.reason === reason ? " selected" : "";
    return (
      `<button type="button" class="reason${on}" data-reason="${reason}">` +
      `${REASON_LABELS[reason]} <kbd>${i + 1}</kbd></button>`
    );
  }).join("");
  const disabled = canSubmit(form) ? "" : " disabled";
  return [
    `<div class="verdicts">${verdictButton("keep", "k")}${verdictButton("remove", "r")}</div>`,
    `<div class="reasons">${reasons}</div>`,
    `<button type="button" class="submit" data-submit${disabled}>submit <kbd>enter</kbd></button>`,
  ].join("\n");
}

export function renderDone(): string {
  return `<div class="done"><h2>Queue complete</h2><p>No entries left to review.</p></div>`;
}

export function renderRetryBanner(message: string): string {
  return (
    `<div class="banner retry" role="alert">Could not reach the server: ` +
    `${escapeHtml(message)}. Your selection is kept; press <kbd>enter</kbd> to retry.</div>`
  );
}

export function renderInlineError(message: string): string {
  return `<p class="inline-error" role="alert">${escapeHtml(message)}</p>`;
}

function percent(part: number, whole: number): string {
  return whole === 0 ? "0%" : `${Math.round((100 * part) / whole)}%`;
}

export function renderProgress(progress: ProgressView): string {
  const rows = Object.keys(progress.per_annotator)
    .sort()
    .map((name) => {
      const row = progress.per_annotator[name];
      if (!row) return "";
      return (
        `<li><span class="who">${escapeHtml(name)}</span> ` +
        `<span class="decided">${row.decided}</span>/<span class="assigned">${row.assigned}</span> ` +
        `(${percent(row.decided, row.assigned)})</li>`
      );
    })
    .join("");
  return [
    `<div class="progress" data-phase="${escapeHtml(progress.phase)}">`,
    `<span class="totals">` +
      `<span class="decided">${progress.decided_assignments}</span>/` +
      `<span class="assigned">${progress.total_assignments}</span> decisions ` +
      `(${percent(progress.decided_assignments, progress.total_assignments)}) over ` +
      `<span class="items">${progress.total_items}</span> items</span>`,
    `<ul class="per-annotator">${rows}</ul>`,
    `</div>`,
  ].join("\n");
}

export function renderAgreement(agreement: AgreementView): string {
  if (agreement.status === "pending" || agreement.kappa === null) {
    return (
      `<div class="agreement pending">` +
      `<span class="kappa">pending</span> agreement over ` +
      `<span class="items">${agreement.items}</span> items, ` +
      `<span class="raters">${agreement.raters}</span> raters</div>`
    );
  }
  return (
    `<div class="agreement" data-kappa="${String(agreement.kappa)}">` +
    `<span class="kappa">κ = ${agreement.kappa.toFixed(2)}</span> over ` +
    `<span class="items">${agreement.items}</span> items, ` +
    `<span class="raters">${agreement.raters}</span> raters</div>`
  );
}
