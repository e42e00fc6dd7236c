// Interaction controllers shared by pointer and keyboard affordances.
// Both input paths funnel into the same commit primitives, so a drag gesture
// and its keyboard equivalent produce identical API traffic.

import type { ApiClient, SessionView } from "./api.js";
import { ApiError } from "./api.js";
import { clampAmount, snap } from "./money.js";
import type { ViewState } from "./state.js";

export const KEY_STEP_SMALL = 1_000;
export const KEY_STEP_LARGE = 10_000;

export class AllocationControl {
  // preview positions during a gesture; dollars shown on bars mid-drag
  private preview = new Map<string, number>();

  constructor(
    private api: ApiClient,
    private state: ViewState,
    private onChange: () => void = () => {},
  ) {}

  previewAmount(projectId: string): number {
    return this.preview.get(projectId) ?? this.state.amount(projectId);
  }

  pending(projectId: string): boolean {
    return this.preview.has(projectId);
  }

  // Pointer path: raw dollar positions stream in while dragging; the bar
  // snaps to the granularity during the gesture and is capped at the
  // remaining budget, never above it.
  dragTo(projectId: string, rawDollars: number): number {
    const snapped = snap(rawDollars, this.state.granularity());
    const capped = clampAmount(snapped, this.state.barCeiling(projectId));
    this.preview.set(projectId, capped);
    this.onChange();
    return capped;
  }

  // Keyboard path: stepper keys move the same preview in granularity
  // multiples (arrow = $1,000, page = $10,000).
  stepKey(projectId: string, delta: number): number {
    const next = this.previewAmount(projectId) + delta;
    return this.dragTo(projectId, next);
  }

  async commit(projectId: string): Promise<void> {
    const target = this.previewAmount(projectId);
    this.preview.delete(projectId);
    if (target === this.state.amount(projectId)) {
      this.onChange();
      return; // nothing changed; no traffic
    }
    await this.mutate(() =>
      this.api.setAllocation(this.sessionId(), projectId, target),
    );
  }

  async clear(projectId: string): Promise<void> {
    this.preview.delete(projectId);
    await this.mutate(() => this.api.clear(this.sessionId(), projectId));
  }

  async fillUp(projectId: string): Promise<void> {
    this.preview.delete(projectId);
    await this.mutate(() => this.api.fillUp(this.sessionId(), projectId));
  }

  async setToCost(projectId: string): Promise<void> {
    this.preview.delete(projectId);
    try {
      const res = await this.api.setToCost(this.sessionId(), projectId);
      if (res.result.clamped) this.state.clamped.add(projectId);
      else this.state.clamped.delete(projectId);
      this.state.applySession(res.session);
    } catch (err) {
      this.fail(err);
    }
    this.onChange();
  }

  private sessionId(): string {
    const session = this.state.session;
    if (!session) throw new Error("no open session");
    return session.session_id;
  }

  private async mutate(fn: () => Promise<SessionView>): Promise<void> {
    try {
      this.state.applySession(await fn());
    } catch (err) {
      this.fail(err); // bar rolls back to the acknowledged amount
    }
    this.onChange();
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) this.state.error = `${err.code}: ${err.message}`;
    else throw err;
  }
}

// Two-list sort model. Drag-and-drop and the keyboard buttons edit the same
// lists; submit posts whatever partial order the voter built (an empty
// sorted list is a legal submission).
export class SortControl {
  sorted: string[];
  unsorted: string[];

  constructor(
    private api: ApiClient,
    private state: ViewState,
    private onChange: () => void = () => {},
  ) {
    this.sorted = [...(state.session?.sorted ?? [])];
    this.unsorted = [...(state.session?.unsorted ?? [])];
  }

  moveToSorted(projectId: string, index: number): void {
    if (!this.unsorted.includes(projectId) && !this.sorted.includes(projectId)) return;
    this.unsorted = this.unsorted.filter((id) => id !== projectId);
    this.sorted = this.sorted.filter((id) => id !== projectId);
    const at = Math.max(0, Math.min(index, this.sorted.length));
    this.sorted.splice(at, 0, projectId);
    this.onChange();
  }

  moveToUnsorted(projectId: string): void {
    if (!this.sorted.includes(projectId)) return;
    this.sorted = this.sorted.filter((id) => id !== projectId);
    this.unsorted.push(projectId);
    this.onChange();
  }

  reorder(projectId: string, newIndex: number): void {
    if (!this.sorted.includes(projectId)) return;
    this.moveToSorted(projectId, newIndex);
  }

  // keyboard equivalents
  keyAdd(projectId: string): void {
    this.moveToSorted(projectId, this.sorted.length);
  }

  keyRemove(projectId: string): void {
    this.moveToUnsorted(projectId);
  }

  keyUp(projectId: string): void {
    const i = this.sorted.indexOf(projectId);
    if (i > 0) this.moveToSorted(projectId, i - 1);
  }

  keyDown(projectId: string): void {
    const i = this.sorted.indexOf(projectId);
    if (i >= 0 && i < this.sorted.length - 1) this.moveToSorted(projectId, i + 1);
  }

  async submit(): Promise<void> {
    const session = this.state.session;
    if (!session) throw new Error("no open session");
    try {
      this.state.applySession(await this.api.submitSort(session.session_id, [...this.sorted]));
    } catch (err) {
      if (err instanceof ApiError) this.state.error = `${err.code}: ${err.message}`;
      else throw err;
    }
    this.onChange();
  }
}
