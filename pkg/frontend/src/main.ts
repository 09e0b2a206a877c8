/** DOM wiring for the two workflows. No framework: the console is two
 * screens talking to five endpoints. */

import { ApiClient, ApiError, DiagnosticContextItem, PredictResponse, Role } from "./api.js";
import { AnnotationController } from "./annotate.js";
import { LabelSet } from "./labels.js";
import { LiveController } from "./live.js";

const api = new ApiClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function contextCard(item: DiagnosticContextItem): HTMLElement {
  const card = el("div", `turn ${item.role}`);
  const head = el("div", "turn-head");
  head.append(
    el("span", `role-badge ${item.role}`, item.role === "teacher" ? "Teacher" : "Student"),
    el("span", "speaker", item.speaker_id),
    el("span", "move-tag", item.talk_move),
  );
  card.append(head, el("div", "turn-text", item.text));
  return card;
}

function distributionChart(labels: LabelSet, resp: PredictResponse): HTMLElement {
  const wrap = el("div", "bars");
  labels.labels.forEach((label, i) => {
    const pct = 100 * (resp.probs[i] ?? 0);
    const row = el("div", "bar-row" + (label === resp.label ? " top" : ""));
    const fill = el("div", "bar-fill");
    fill.style.width = `${Math.max(pct, 0.5)}%`;
    const track = el("div", "bar-track");
    track.append(fill);
    row.append(el("span", "bar-label", label), track, el("span", "bar-pct", `${pct.toFixed(1)}%`));
    wrap.append(row);
  });
  return wrap;
}

// ---------------------------------------------------------------- annotation

function renderAnnotation(root: HTMLElement, labels: LabelSet, ctl: AnnotationController): void {
  root.replaceChildren();
  const bar = el("div", "progress");
  const frac = ctl.progress.total ? ctl.progress.done / ctl.progress.total : 0;
  const fill = el("div", "progress-fill");
  fill.style.width = `${100 * frac}%`;
  bar.append(fill);
  root.append(bar, el("div", "progress-text", `${ctl.progress.done} / ${ctl.progress.total}`));

  if (ctl.finished) {
    const done = el("div", "done-screen");
    done.append(el("h2", undefined, "All examples annotated. Thank you!"));
    const link = el("a", undefined, "View the agreement report");
    link.setAttribute("href", "/report");
    done.append(link);
    root.append(done);
    return;
  }
  if (!ctl.current) return;

  const ctx = el("div", "context");
  ctl.current.context.forEach((item) => ctx.append(contextCard(item)));
  root.append(el("h3", undefined, "Conversation so far"), ctx);

  root.append(el("h3", undefined, "Most likely next teacher move (primary)"));
  const primaryRow = el("div", "choices");
  labels.labels.forEach((label) => {
    const btn = el("button", "choice" + (ctl.primary === label ? " selected" : ""), label);
    btn.addEventListener("click", () => {
      ctl.setPrimary(label);
      renderAnnotation(root, labels, ctl);
    });
    primaryRow.append(btn);
  });
  root.append(primaryRow);

  root.append(el("h3", undefined, "All acceptable next moves"));
  const accRow = el("div", "choices");
  labels.labels.forEach((label) => {
    const isPrimary = label === ctl.primary;
    const btn = el(
      "button",
      "choice" + (ctl.acceptable.has(label) ? " accepted" : "") + (isPrimary ? " locked" : ""),
      label,
    );
    btn.addEventListener("click", () => {
      ctl.toggleAcceptable(label);
      renderAnnotation(root, labels, ctl);
    });
    accRow.append(btn);
  });
  root.append(accRow);

  const submit = el("button", "submit", "Submit annotation");
  submit.disabled = !ctl.canSubmit();
  submit.addEventListener("click", () => {
    void ctl
      .submit()
      .then(() => renderAnnotation(root, labels, ctl))
      .catch((err) => showError(root, err));
  });
  root.append(submit);

  if (ctl.retryBuffer.length > 0) {
    const retry = el("button", "retry", `Retry ${ctl.retryBuffer.length} unsent`);
    retry.addEventListener("click", () => {
      void ctl.retryPending().then(() => renderAnnotation(root, labels, ctl));
    });
    root.append(retry);
  }
}

// ---------------------------------------------------------------------- live

function renderLive(root: HTMLElement, labels: LabelSet, ctl: LiveController): void {
  root.replaceChildren();
  const log = el("div", "transcript");
  ctl.turns.forEach((turn) => {
    log.append(
      contextCard({
        speaker_id: turn.item.speaker_id,
        role: turn.item.role,
        text: turn.item.text,
        talk_move: turn.item.talk_move ?? "",
      }),
    );
  });
  root.append(log);

  const latest = ctl.turns.length
    ? ctl.turns[ctl.turns.length - 1]!.prediction
    : ctl.coldStart;
  if (latest) {
    root.append(el("h3", undefined, `Predicted next teacher move: ${latest.label}`));
    root.append(distributionChart(labels, latest));
    if (ctl.turns.length) {
      root.append(
        el("div", "latency", `latency ${ctl.turns[ctl.turns.length - 1]!.latencyMs.toFixed(0)} ms`),
      );
    }
  }

  const form = el("div", "entry");
  const roleSel = el("select");
  for (const role of ["teacher", "student"] as const) {
    const opt = el("option", undefined, role);
    opt.value = role;
    roleSel.append(opt);
  }
  const speaker = el("input");
  speaker.placeholder = "speaker id";
  speaker.value = "t";
  const text = el("input", "wide");
  text.placeholder = "utterance text";
  const moveSel = el("select");
  for (const label of labels.teacherChoices()) {
    const opt = el("option", undefined, label);
    opt.value = label;
    moveSel.append(opt);
  }
  roleSel.addEventListener("change", () => {
    // student turns are tagged Wait automatically and the tag is locked
    moveSel.disabled = roleSel.value === "student";
    speaker.value = roleSel.value === "student" ? "s1" : "t";
  });
  const send = el("button", "submit", "Add turn");
  send.addEventListener("click", () => {
    const role = roleSel.value as Role;
    if (!text.value.trim()) return;
    void ctl
      .addTurn(role, speaker.value || "anon", text.value, role === "teacher" ? moveSel.value : undefined)
      .then(() => renderLive(root, labels, ctl))
      .catch((err) => showError(root, err));
  });
  const clear = el("button", "retry", "Clear transcript");
  clear.addEventListener("click", () => {
    void ctl.reset().then(() => renderLive(root, labels, ctl));
  });
  form.append(roleSel, speaker, text, moveSel, send, clear);
  root.append(form);
  text.focus();
}

function showError(root: HTMLElement, err: unknown): void {
  const msg = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
  const banner = el("div", "error", msg);
  root.prepend(banner);
  setTimeout(() => banner.remove(), 6000);
}

// --------------------------------------------------------------------- entry

async function boot(): Promise<void> {
  const app = document.getElementById("app")!;
  const meta = await api.meta();
  const labels = new LabelSet(meta.labels);

  const tabs = el("div", "tabs");
  const liveTab = el("button", "tab selected", "Live discussion");
  const annTab = el("button", "tab", "Annotation");
  tabs.append(liveTab, annTab);
  const pane = el("div", "pane");
  app.replaceChildren(
    el("div", "header", `next-move console · model ${meta.model_version}`),
    tabs,
    pane,
  );

  const live = new LiveController(api, labels);
  await live.reset();
  renderLive(pane, labels, live);

  let annotation: AnnotationController | null = null;
  liveTab.addEventListener("click", () => {
    liveTab.classList.add("selected");
    annTab.classList.remove("selected");
    renderLive(pane, labels, live);
  });
  annTab.addEventListener("click", () => {
    annTab.classList.add("selected");
    liveTab.classList.remove("selected");
    const id = annotation?.annotatorId ?? window.prompt("annotator id", meta.annotators[0] ?? "");
    if (!id) return;
    if (!annotation || annotation.annotatorId !== id) {
      annotation = new AnnotationController(api, labels, id);
    }
    void annotation.next().then(() => renderAnnotation(pane, labels, annotation!));
  });
}

void boot().catch((err) => {
  document.getElementById("app")!.textContent = `failed to reach the service: ${err}`;
});
