// Allocation bar chart, used both for the blind stage and the cost-check
// stage. Bars are arrayed in the voter's sort order and snap to the
// granularity while dragging; each bar carries clear / fill-up buttons and a
// keyboard stepper. In check mode, cost rules are superimposed and a
// set-to-cost button appears.

import type { PublicBallot } from "../api.js";
import type { AllocationControl } from "../controls.js";
import { KEY_STEP_LARGE, KEY_STEP_SMALL } from "../controls.js";
import { formatDollars } from "../money.js";
import type { ViewState } from "../state.js";

const BAR_HEIGHT_PX = 220;

export interface AllocateViewOptions {
  withCosts: boolean;
  onContinue: () => void;
}

function barFor(
  doc: Document,
  state: ViewState,
  control: AllocationControl,
  ballot: PublicBallot,
  projectId: string,
  withCosts: boolean,
): HTMLElement {
  const project = ballot.projects.find((p) => p.id === projectId);
  const budget = state.session?.budget_total ?? 1;
  const cell = doc.createElement("div");
  cell.className = "bar-cell";
  cell.dataset.project = projectId;

  const amount = control.previewAmount(projectId);
  const value = doc.createElement("div");
  value.className = "bar-value";
  value.dataset.role = "amount";
  value.textContent = formatDollars(amount);
  cell.appendChild(value);

  const track = doc.createElement("div");
  track.className = "bar-track";
  track.style.height = `${BAR_HEIGHT_PX}px`;

  const fill = doc.createElement("div");
  fill.className = "bar-fill";
  fill.style.height = `${Math.round((amount / budget) * BAR_HEIGHT_PX)}px`;
  fill.tabIndex = 0;
  fill.setAttribute("role", "slider");
  fill.setAttribute("aria-label", `Dollars for ${project?.name ?? projectId}`);
  fill.setAttribute("aria-valuemin", "0");
  fill.setAttribute("aria-valuemax", String(budget));
  fill.setAttribute("aria-valuenow", String(amount));
  track.appendChild(fill);

  if (withCosts && state.costs && state.costs[projectId]) {
    const mark = state.costs[projectId];
    const rule = doc.createElement("div");
    rule.className = `cost-rule ${mark.met ? "met" : "not-met"}`;
    rule.dataset.role = "cost-rule";
    rule.title = `Estimated cost ${formatDollars(mark.cost_estimate)}`;
    rule.style.bottom = `${Math.min(BAR_HEIGHT_PX, Math.round((mark.rounded_cost / budget) * BAR_HEIGHT_PX))}px`;
    track.appendChild(rule);
    if (state.clamped.has(projectId)) {
      const badge = doc.createElement("span");
      badge.className = "badge partially-funded";
      badge.textContent = "partially funded";
      cell.appendChild(badge);
    }
  }

  // pointer path: track-relative drag, snapping live
  const dollarsAtPointer = (ev: PointerEvent): number => {
    const rect = track.getBoundingClientRect();
    const fraction = (rect.bottom - ev.clientY) / (rect.height || BAR_HEIGHT_PX);
    return fraction * budget;
  };
  let dragging = false;
  track.addEventListener("pointerdown", (ev) => {
    dragging = true;
    control.dragTo(projectId, dollarsAtPointer(ev as PointerEvent));
  });
  track.addEventListener("pointermove", (ev) => {
    if (dragging) control.dragTo(projectId, dollarsAtPointer(ev as PointerEvent));
  });
  track.addEventListener("pointerup", () => {
    if (!dragging) return;
    dragging = false;
    void control.commit(projectId);
  });

  // keyboard path: identical mutations via the same controller
  fill.addEventListener("keydown", (ev) => {
    const key = (ev as KeyboardEvent).key;
    if (key === "ArrowUp") control.stepKey(projectId, KEY_STEP_SMALL);
    else if (key === "ArrowDown") control.stepKey(projectId, -KEY_STEP_SMALL);
    else if (key === "PageUp") control.stepKey(projectId, KEY_STEP_LARGE);
    else if (key === "PageDown") control.stepKey(projectId, -KEY_STEP_LARGE);
    else if (key === "Enter") void control.commit(projectId);
    else return;
    ev.preventDefault();
  });

  cell.appendChild(track);

  const label = doc.createElement("div");
  label.className = "bar-label";
  label.textContent = project?.name ?? projectId;
  cell.appendChild(label);

  const buttons = doc.createElement("div");
  buttons.className = "bar-buttons";
  const mk = (text: string, role: string, onClick: () => void) => {
    const b = doc.createElement("button");
    b.type = "button";
    b.dataset.role = role;
    b.textContent = text;
    b.setAttribute("aria-label", `${text} ${project?.name ?? projectId}`);
    b.addEventListener("click", onClick);
    buttons.appendChild(b);
  };
  mk("clear", "clear", () => void control.clear(projectId));
  mk("fill up", "fill-up", () => void control.fillUp(projectId));
  if (withCosts) mk("set to cost", "set-to-cost", () => void control.setToCost(projectId));
  cell.appendChild(buttons);
  return cell;
}

export function renderAllocateView(
  doc: Document,
  container: HTMLElement,
  state: ViewState,
  control: AllocationControl,
  options: AllocateViewOptions,
): void {
  const ballot = state.ballot;
  if (!ballot || !state.session) return;
  container.innerHTML = "";

  const heading = doc.createElement("h2");
  heading.textContent = options.withCosts
    ? "Check your allocations against estimated costs"
    : "Allocate your ward's budget across projects";
  container.appendChild(heading);

  const remaining = doc.createElement("div");
  remaining.className = "remaining-box";
  remaining.dataset.role = "remaining";
  remaining.textContent = `Remaining: ${formatDollars(state.remaining)} of ${formatDollars(
    state.session.budget_total,
  )}`;
  container.appendChild(remaining);

  if (state.error) {
    const err = doc.createElement("div");
    err.className = "error-box";
    err.dataset.role = "error";
    err.textContent = state.error;
    container.appendChild(err);
  }

  const chart = doc.createElement("div");
  chart.className = "bar-chart";
  for (const projectId of state.orderedProjects()) {
    chart.appendChild(barFor(doc, state, control, ballot, projectId, options.withCosts));
  }
  container.appendChild(chart);

  const next = doc.createElement("button");
  next.type = "button";
  next.className = "primary";
  next.dataset.role = "continue";
  next.textContent = options.withCosts ? "Continue to survey" : "See estimated costs";
  next.addEventListener("click", options.onContinue);
  container.appendChild(next);
}
