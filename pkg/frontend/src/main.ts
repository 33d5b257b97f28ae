// DOM glue. All behaviour lives in ReviewController and the view
// functions; this file only wires events and swaps innerHTML.

import { ReviewController } from "./controller.js";
import {
  renderAgreement,
  renderDone,
  renderForm,
  renderInlineError,
  renderProgress,
  renderQueueItem,
  renderRetryBanner,
} from "./views.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function landing(): void {
  byId("item").innerHTML = [
    `<form id="landing" class="landing">`,
    `<label>annotator <input name="annotator" required></label>`,
    `<label>session <input name="session" required></label>`,
    `<button type="submit">start</button>`,
    `</form>`,
  ].join("\n");
  byId("landing").addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(event.target as HTMLFormElement);
    const params = new URLSearchParams({
      annotator: String(data.get("annotator") ?? ""),
      session: String(data.get("session") ?? ""),
    });
    window.location.search = params.toString();
  });
}

function run(annotator: string, session: string): void {
  const controller = new ReviewController(annotator, session);

  const render = () => {
    byId("banner").innerHTML = controller.banner ? renderRetryBanner(controller.banner) : "";
    byId("error").innerHTML = controller.inlineError
      ? renderInlineError(controller.inlineError)
      : "";
    byId("progress").innerHTML = controller.progress ? renderProgress(controller.progress) : "";
    byId("agreement").innerHTML = controller.agreement
      ? renderAgreement(controller.agreement)
      : "";
    const current = controller.current();
    if (current) {
      byId("item").innerHTML = renderQueueItem(current.entry, current.index, current.total);
      byId("form").innerHTML = renderForm(controller.form);
    } else if (controller.done()) {
      byId("item").innerHTML = renderDone();
      byId("form").innerHTML = "";
    }
  };

  controller.onChange(render);

  document.addEventListener("keydown", (event) => {
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    if (event.target instanceof HTMLInputElement) return;
    void controller.handleKey(event.key);
  });

  byId("form").addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("button");
    if (!target) return;
    if (target.dataset.verdict) {
      controller.setVerdict(target.dataset.verdict as "keep" | "remove");
    } else if (target.dataset.reason) {
      controller.setReason(target.dataset.reason as never);
    } else if (target.hasAttribute("data-submit")) {
      void controller.submit();
    }
  });

  byId("whoami").textContent = `${annotator} @ ${session}`;
  void controller.load();
}

const params = new URLSearchParams(window.location.search);
const annotator = params.get("annotator");
const session = params.get("session");
if (annotator && session) {
  run(annotator, session);
} else {
  landing();
}
