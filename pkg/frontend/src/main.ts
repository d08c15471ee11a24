// Review console single-page app: arbitration queue, side-by-side review
// with draft ground-truth editing, and read-only dashboards.

import { ApiClient } from "./api.js";
import { DashboardsView } from "./dashboards.js";
import { QueueView } from "./queue.js";
import { ReviewSession } from "./session.js";
import { banner, el, renderPrompt, renderTable, renderViolations } from "./render.js";
import { RUBRIC_CATEGORIES } from "./types.js";

const api = new ApiClient(
  (window as { PIIQA_API_URL?: string }).PIIQA_API_URL ?? "",
);
const reviewerId =
  new URLSearchParams(window.location.search).get("reviewer") ?? "qa-web";

const queueView = new QueueView(api);
const dashboards = new DashboardsView(api);
const session = new ReviewSession(api, reviewerId);

const content = document.getElementById("content")!;

function setView(render: () => void): void {
  content.replaceChildren();
  render();
}

// ---- queue ----

async function showQueue(): Promise<void> {
  await queueView.refresh();
  setView(() => {
    content.append(el("h2", undefined, "Arbitration queue"));
    if (queueView.error) {
      content.append(banner("error", `service error: ${queueView.error}`));
    }
    if (queueView.empty) {
      content.append(el("p", "empty-state", "Nothing waiting for review."));
      return;
    }
    const rows = queueView.items.map((item) => [
      item.task_id,
      item.locale,
      item.phase,
      item.ira === null ? null : item.ira.toFixed(3),
      item.submissions,
    ]);
    const table = renderTable(
      ["task", "locale", "phase", "IRA", "submissions"],
      rows,
      "queue-table",
    );
    table.tBodies[0]?.querySelectorAll("tr").forEach((tr, i) => {
      tr.addEventListener("click", () => {
        void openReview(queueView.items[i]!.task_id);
      });
    });
    content.append(table);
    content.append(
      el("p", "muted", `${queueView.total} task(s) queued, page ${queueView.page}`),
    );
  });
}

// ---- review ----

async function openReview(taskId: string): Promise<void> {
  await session.load(taskId);
  renderReview();
}

function renderReview(): void {
  const task = session.task;
  if (!task) return;
  setView(() => {
    content.append(el("h2", undefined, `Review ${task.id}`));
    content.append(
      el(
        "p",
        "muted",
        `${task.locale} · ${task.phase} · ${task.domain} · IRA ${
          task.ira === null ? "n/a" : task.ira.toFixed(3)
        }`,
      ),
    );

    const columns = el("div", "submissions");
    for (const submission of task.submissions) {
      const col = el("div", "submission");
      col.append(el("h3", undefined, submission.annotator_id));
      col.append(renderPrompt(task.prompt, submission.annotations));
      const pick = el("button", undefined, `Use as ground truth`);
      pick.addEventListener("click", () => {
        session.chooseSubmission(submission.id);
        session.categories.clear();
        renderReview();
      });
      col.append(pick);
      if (session.chosenSubmissionId === submission.id) {
        col.classList.add("chosen");
      }
      columns.append(col);
    }
    content.append(columns);

    for (const breakdown of task.agreement) {
      content.append(
        el(
          "p",
          "muted",
          `agreement ${breakdown.submission_a} × ${breakdown.submission_b}: ` +
            `span ${breakdown.span_score.toFixed(2)}, type ${breakdown.type_score.toFixed(2)}, ` +
            `text ${breakdown.text_score.toFixed(2)}, overall ${breakdown.overall.toFixed(2)}`,
        ),
      );
    }

    if (session.chosenSubmissionId !== null) {
      content.append(el("h3", undefined, "Draft ground truth"));
      content.append(renderPrompt(task.prompt, session.draftGt));
      const editor = renderTable(
        ["#", "start", "end", "type", "text", ""],
        session.draftGt.map((ann, i) => [i + 1, ann.start, ann.end, ann.type, ann.text, ""]),
        "draft-table",
      );
      editor.tBodies[0]?.querySelectorAll("tr").forEach((tr, i) => {
        const remove = el("button", undefined, "remove");
        remove.addEventListener("click", () => {
          session.removeSpan(i);
          renderReview();
        });
        tr.cells[tr.cells.length - 1]!.append(remove);
      });
      content.append(editor);

      const violations = session.violations;
      if (violations.length > 0) content.append(renderViolations(violations));

      const rubric = el("fieldset", "rubric");
      rubric.append(el("legend", undefined, "QA rubric"));
      for (const category of RUBRIC_CATEGORIES) {
        const label = el("label");
        const box = el("input") as HTMLInputElement;
        box.type = "checkbox";
        box.checked = session.categories.has(category);
        box.addEventListener("change", () => {
          session.toggleCategory(category);
          renderReview();
        });
        label.append(box, ` ${category.replace("_", " ")}`);
        rubric.append(label);
      }
      content.append(rubric);
      content.append(el("p", "muted", `verdict: ${session.verdict}`));

      const submit = el("button", "submit", "Submit review");
      submit.disabled = !session.canSubmit;
      submit.addEventListener("click", () => {
        void submitAndAdvance();
      });
      content.append(submit);
    }

    if (session.status === "conflict") {
      content.append(
        banner("error", "Task was reviewed elsewhere – refresh the queue."),
      );
    } else if (session.error) {
      content.append(banner("error", session.error));
    }
  });
}

async function submitAndAdvance(): Promise<void> {
  try {
    await session.submit();
  } catch {
    renderReview(); // violations / conflict banner
    return;
  }
  const next = await session.nextTask(queueView.filters.locale, queueView.filters.phase);
  if (next === null) {
    await showQueue();
  } else {
    renderReview();
  }
}

// ---- dashboards ----

async function showDashboards(): Promise<void> {
  await dashboards.refresh();
  setView(() => {
    content.append(el("h2", undefined, "Dashboards"));
    if (dashboards.stale) {
      content.append(banner("stale", "Service unreachable – showing last snapshot."));
    } else if (dashboards.error) {
      content.append(banner("error", dashboards.error));
    }
    const snapshot = dashboards.snapshot;
    if (!snapshot) return;

    content.append(el("h3", undefined, "Annotator quality"));
    content.append(
      renderTable(
        ["annotator", "score", "reviewed", "status"],
        dashboards.qualityRows().map((row) => [
          row.annotatorId,
          row.score === null ? null : row.score.toFixed(3),
          row.reviewed,
          row.flagged ? "below threshold" : "ok",
        ]),
      ),
    );

    content.append(el("h3", undefined, "Error categories"));
    for (const [phase, payload] of Object.entries(snapshot.errors)) {
      content.append(el("h4", undefined, phase));
      content.append(
        renderTable(
          ["category", "count"],
          Object.entries(payload.categories).map(([category, count]) => [category, count]),
        ),
      );
    }
  });
}

// ---- navigation ----

document.getElementById("nav-queue")?.addEventListener("click", () => void showQueue());
document
  .getElementById("nav-dashboards")
  ?.addEventListener("click", () => void showDashboards());

void showQueue();
