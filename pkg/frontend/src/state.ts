// Client view state. Every dollar figure shown to the voter comes from the
// last server-acknowledged session view; cost marks exist only after the
// reveal response has arrived.

import type { CostMark, MatrixPayload, PublicBallot, SessionView, Stage } from "./api.js";

export interface DashboardSelection {
  wards: number[];
  axis: string;
  mode: "counts" | "percent";
}

export const DEFAULT_WARDS = [29, 35, 36, 49];

export class ViewState {
  ballot: PublicBallot | null = null;
  session: SessionView | null = null;
  costs: Record<string, CostMark> | null = null;
  error: string | null = null;
  clamped: Set<string> = new Set();
  dashboard: DashboardSelection = { wards: [...DEFAULT_WARDS], axis: "race", mode: "counts" };
  matrix: MatrixPayload | null = null;

  get stage(): Stage {
    return this.session?.stage ?? "Overview";
  }

  // last server-acknowledged remaining budget; never computed client-side
  get remaining(): number {
    return this.session?.remaining ?? this.ballot?.budget_total ?? 0;
  }

  amount(projectId: string): number {
    return this.session?.amounts[projectId] ?? 0;
  }

  granularity(): number {
    return this.session?.granularity ?? this.ballot?.granularity ?? 1000;
  }

  // the most a bar can hold without breaching the budget cap
  barCeiling(projectId: string): number {
    return this.amount(projectId) + this.remaining;
  }

  applySession(view: SessionView): void {
    this.session = view;
    this.error = null;
    if (view.costs) this.costs = view.costs;
  }

  applyCosts(costs: Record<string, CostMark>): void {
    this.costs = costs;
  }

  costsKnown(): boolean {
    return this.costs !== null;
  }

  orderedProjects(): string[] {
    if (!this.session || !this.ballot) return [];
    const ballotOrder = this.ballot.projects.map((p) => p.id);
    const ranked = this.session.sorted.filter((id) => ballotOrder.includes(id));
    const rest = ballotOrder.filter((id) => !ranked.includes(id));
    return [...ranked, ...rest];
  }
}
