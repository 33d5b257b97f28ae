import { describe, expect, it } from "vitest";

import type { AgreementView, ProgressView, QueueEntry } from "../src/api.js";
import { emptyForm } from "../src/state.js";
import {
  renderAgreement,
  renderDone,
  renderForm,
  renderInlineError,
  renderProgress,
  renderQueueItem,
  renderRetryBanner,
} from "../src/views.js";

function entry(over: Partial<QueueEntry> = {}): QueueEntry {
  return {
    id: "00000000000000a1",
    package: "discord4j.core.object",
    enclosing_class: "Role",
    kind: "method",
    code: "public Optional<Snowflake> getBotId() {\n    return data.botId().toOptional()\n               .map(Snowflake::of);\n}",
    documentation: "Gets the id of the bot this role belongs to, if present.\n\n@return the bot id",
    repo: "Discord4J",
    license_id: "LGPL-3.0",
    uses_lambda: false,
    flags: [],
    ...over,
  };
}

function unrender(html: string): string {
  return html
    .replace(/<[^>]+>/g, "")
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&amp;/g, "&");
}

describe("renderQueueItem", () => {
  it("labels position k of n", () => {
    for (let k = 0; k < 6; k++) {
      expect(renderQueueItem(entry(), k, 6)).toContain(`<span class="position">${k + 1} of 6</span>`);
    }
  });

  it("shows package, class and entry id", () => {
    const html = renderQueueItem(entry(), 0, 1);
    expect(html).toContain("discord4j.core.object");
    expect(html).toContain("Role");
    expect(html).toContain("00000000000000a1");
  });

  it("keeps both panes byte-faithful", () => {
    const e = entry({
      code: "  int x = 0; // <tag> & \"str\"  \n\tmore();\n",
      documentation: "  leading blanks kept\n<b>not rendered</b>\ntrailing too  ",
    });
    const html = renderQueueItem(e, 2, 5);
    const code = html.match(/<pre class="pane code"><code>([\s\S]*?)<\/code><\/pre>/);
    const doc = html.match(/<pre class="pane doc"><code>([\s\S]*?)<\/code><\/pre>/);
    expect(code).not.toBeNull();
    expect(doc).not.toBeNull();
    expect(unrender(code![1]!)).toBe(e.code);
    expect(unrender(doc![1]!)).toBe(e.documentation);
  });

  it("renders the documentation without interpreting markup", () => {
    const html = renderQueueItem(entry({ documentation: "<b>bold?</b> {@link Foo}" }), 0, 1);
    expect(html).toContain("&lt;b&gt;bold?&lt;/b&gt; {@link Foo}");
  });

  it("highlights the code pane", () => {
    const html = renderQueueItem(entry(), 0, 1);
    expect(html).toContain('<span class="kw">public</span>');
  });

  it("surfaces PII flags as badges", () => {
    const html = renderQueueItem(entry({ flags: ["pii_email", "pii_url"] }), 0, 1);
    expect(html).toContain('<span class="badge pii">pii_email</span>');
    expect(html).toContain('<span class="badge pii">pii_url</span>');
    expect(renderQueueItem(entry(), 0, 1)).not.toContain("badge pii");
  });
});

describe("renderForm", () => {
  it("disables submit until the form is valid", () => {
    expect(renderForm(emptyForm())).toContain("data-submit disabled");
    expect(renderForm({ verdict: "keep", reason: "ok" })).toContain("data-submit>");
    expect(renderForm({ verdict: "remove", reason: "ok" })).toContain("data-submit disabled");
    expect(renderForm({ verdict: "remove", reason: "faulty" })).toContain("data-submit>");
  });

  it("marks the chosen verdict and reason", () => {
    const html = renderForm({ verdict: "remove", reason: "irrelevant" });
    expect(html).toContain('class="verdict selected" data-verdict="remove"');
    expect(html).toContain('class="reason selected" data-reason="irrelevant"');
    expect(html).not.toContain('class="verdict selected" data-verdict="keep"');
  });

  it("lists all five reasons with their key bindings", () => {
    const html = renderForm(emptyForm());
    for (const [i, reason] of ["ok", "faulty", "out_of_context", "irrelevant", "personal_info"].entries()) {
      expect(html).toContain(`data-reason="${reason}"`);
      expect(html).toContain(`<kbd>${i + 1}</kbd>`);
    }
  });
});

describe("renderAgreement", () => {
  it("renders a perfect kappa as 1.00", () => {
    const view: AgreementView = { session: "s", kappa: 1.0, items: 8, raters: 2, status: "ok" };
    const html = renderAgreement(view);
    expect(html).toContain("κ = 1.00");
    expect(html).toContain('data-kappa="1"');
  });

  it("carries the exact API value alongside the display form", () => {
    const view: AgreementView = {
      session: "s",
      kappa: 0.6597938144329897,
      items: 30,
      raters: 3,
      status: "ok",
    };
    const html = renderAgreement(view);
    expect(html).toContain('data-kappa="0.6597938144329897"');
    expect(html).toContain("κ = 0.66");
    expect(html).toContain('<span class="items">30</span>');
    expect(html).toContain('<span class="raters">3</span>');
  });

  it("shows pending without extrapolating", () => {
    const view: AgreementView = { session: "s", kappa: null, items: 8, raters: 2, status: "pending" };
    const html = renderAgreement(view);
    expect(html).toContain("pending");
    expect(html).not.toContain("data-kappa");
    expect(html).not.toContain("κ =");
  });
});

describe("renderProgress", () => {
  const progress: ProgressView = {
    session: "s",
    phase: "review",
    total_items: 6,
    total_assignments: 12,
    decided_assignments: 9,
    complete: false,
    per_annotator: {
      bob: { assigned: 6, decided: 3 },
      alice: { assigned: 6, decided: 6 },
    },
  };

  it("shows the raw API counts", () => {
    const html = renderProgress(progress);
    expect(html).toContain('<span class="decided">9</span>/<span class="assigned">12</span>');
    expect(html).toContain('<span class="items">6</span>');
  });

  it("derives completion percentages from those counts", () => {
    const html = renderProgress(progress);
    expect(html).toContain("(75%)");
    expect(html).toContain("(100%)");
    expect(html).toContain("(50%)");
  });

  it("lists annotators in sorted order", () => {
    const html = renderProgress(progress);
    expect(html.indexOf("alice")).toBeLessThan(html.indexOf("bob"));
  });

  it("survives an empty session", () => {
    const html = renderProgress({
      ...progress,
      total_assignments: 0,
      decided_assignments: 0,
      per_annotator: {},
    });
    expect(html).toContain("(0%)");
  });
});

describe("small views", () => {
  it("done view names the state", () => {
    expect(renderDone()).toContain("Queue complete");
  });

  it("retry banner keeps the failure message and escapes it", () => {
    const html = renderRetryBanner("fetch failed: <ECONNREFUSED>");
    expect(html).toContain("fetch failed: &lt;ECONNREFUSED&gt;");
    expect(html).toContain("retry");
  });

  it("inline error is escaped", () => {
    expect(renderInlineError("entry <x> not assigned")).toContain("entry &lt;x&gt; not assigned");
  });
});
