// Page flow: overview -> sort -> allocate -> check -> demographics -> done,
// then the results dashboard. Mutations go to the service; every dollar shown
// is the server's acknowledged figure.

import { ApiClient, FetchTransport } from "./api.js";
import { AllocationControl, SortControl } from "./controls.js";
import { ViewState } from "./state.js";
import { renderAllocateView } from "./views/allocate.js";
import { parseWardsGeo, renderDashboard, type WardGeometry } from "./views/dashboard.js";
import { renderSortView } from "./views/sort.js";

const SURVEY_FIELDS: [keyof SurveyForm, string, string[]][] = [
  ["race", "Race", ["white", "black", "hispanic-or-latino", "asian", "other"]],
  ["age_band", "Age", ["18-24", "25-34", "35-44", "45-54", "55-64", "65-plus"]],
  ["income_band", "Household income", ["under-25k", "25k-50k", "50k-100k", "100k-200k", "over-200k"]],
  ["education_band", "Education", ["high-school-or-less", "some-college", "bachelors", "graduate"]],
];

interface SurveyForm {
  race: string;
  age_band: string;
  income_band: string;
  education_band: string;
}

export class App {
  private sortControl: SortControl | null = null;
  private allocationControl: AllocationControl;
  private geometries: WardGeometry[] = [];

  constructor(
    private doc: Document,
    private root: HTMLElement,
    private api: ApiClient,
    private state: ViewState = new ViewState(),
  ) {
    this.allocationControl = new AllocationControl(api, this.state, () => this.render());
  }

  async start(ballotRef: string, geo: unknown): Promise<void> {
    this.geometries = parseWardsGeo(geo);
    this.state.ballot = await this.api.getBallot(ballotRef);
    this.state.applySession(await this.api.createSession(ballotRef));
    this.render();
  }

  render(): void {
    switch (this.state.stage) {
      case "Overview":
        this.renderOverview();
        break;
      case "Sort":
        this.renderSort();
        break;
      case "AllocateBlind":
        renderAllocateView(this.doc, this.root, this.state, this.allocationControl, {
          withCosts: false,
          onContinue: () => void this.toCheck(),
        });
        break;
      case "CheckWithCosts":
        renderAllocateView(this.doc, this.root, this.state, this.allocationControl, {
          withCosts: true,
          onContinue: () => void this.toDemographics(),
        });
        break;
      case "Demographics":
        this.renderSurvey();
        break;
      case "Done":
        void this.renderDone();
        break;
    }
  }

  private renderOverview(): void {
    const doc = this.doc;
    this.root.innerHTML = "";
    const h = doc.createElement("h1");
    h.textContent = "Your ward's participatory budget";
    this.root.appendChild(h);
    const p = doc.createElement("p");
    p.textContent =
      "Residents proposed these projects and ward staff vetted them. " +
      "You'll rank the projects, then draw how you would split the budget, " +
      "then check your picks against estimated costs. An optional survey at " +
      "the end helps show how representative the vote is; your answers are " +
      "never stored with your ballot.";
    this.root.appendChild(p);
    const start = doc.createElement("button");
    start.type = "button";
    start.className = "primary";
    start.textContent = "Start voting";
    start.addEventListener("click", () => void this.toSort());
    this.root.appendChild(start);
  }

  private async toSort(): Promise<void> {
    const session = this.expectSession();
    this.state.applySession(await this.api.advance(session.session_id));
    this.render();
  }

  private renderSort(): void {
    if (!this.state.ballot) return;
    if (!this.sortControl) {
      this.sortControl = new SortControl(this.api, this.state, () => this.renderSort());
    }
    renderSortView(this.doc, this.root, this.state.ballot, this.sortControl, () => {
      void this.submitSortAndAdvance();
    });
  }

  private async submitSortAndAdvance(): Promise<void> {
    const control = this.sortControl;
    if (!control) return;
    await control.submit();
    const session = this.expectSession();
    if (this.state.error === null) {
      this.state.applySession(await this.api.advance(session.session_id));
      this.sortControl = null;
    }
    this.render();
  }

  private async toCheck(): Promise<void> {
    const session = this.expectSession();
    const revealed = await this.api.reveal(session.session_id);
    this.state.applyCosts(revealed.costs);
    this.state.applySession(revealed.session);
    this.render();
  }

  private async toDemographics(): Promise<void> {
    const session = this.expectSession();
    this.state.applySession(await this.api.advance(session.session_id));
    this.render();
  }

  private renderSurvey(): void {
    const doc = this.doc;
    this.root.innerHTML = "";
    const h = doc.createElement("h2");
    h.textContent = "Optional: tell us about yourself";
    this.root.appendChild(h);
    const note = doc.createElement("p");
    note.className = "hint";
    note.textContent =
      "Each question can be left undisclosed. Responses are stored by ward only, never with your allocation.";
    this.root.appendChild(note);

    const selects = new Map<string, HTMLSelectElement>();
    for (const [field, label, options] of SURVEY_FIELDS) {
      const wrap = doc.createElement("label");
      wrap.className = "survey-field";
      wrap.append(`${label}: `);
      const select = doc.createElement("select");
      for (const value of ["undisclosed", ...options]) {
        const opt = doc.createElement("option");
        opt.value = value;
        opt.textContent = value;
        select.appendChild(opt);
      }
      selects.set(field, select);
      wrap.appendChild(select);
      this.root.appendChild(wrap);
    }

    const submit = doc.createElement("button");
    submit.type = "button";
    submit.className = "primary";
    submit.textContent = "Finish and cast ballot";
    submit.addEventListener("click", () => {
      const form = Object.fromEntries(
        [...selects.entries()].map(([field, select]) => [field, select.value]),
      ) as unknown as SurveyForm;
      void this.finish(form);
    });
    this.root.appendChild(submit);
  }

  private async finish(form: SurveyForm): Promise<void> {
    const session = this.expectSession();
    const disclosed = Object.values(form).some((v) => v !== "undisclosed");
    if (disclosed) {
      this.state.applySession(await this.api.recordDemographics(session.session_id, form));
    }
    const token = `tok-${session.session_id}`;
    const res = await this.api.finalize(session.session_id, token);
    this.state.applySession(res.session);
    this.render();
  }

  private async renderDone(): Promise<void> {
    const doc = this.doc;
    this.root.innerHTML = "";
    const h = doc.createElement("h2");
    h.textContent = "Thanks for voting!";
    this.root.appendChild(h);
    const dash = doc.createElement("div");
    this.root.appendChild(dash);
    const ballot = this.state.ballot;
    const categories = ballot ? [...new Set(ballot.projects.map((p) => p.category))].sort() : [];
    await renderDashboard(doc, dash, {
      api: this.api,
      state: this.state,
      categories,
      geometries: this.geometries,
      rerender: () => void this.renderDone(),
    });
  }

  private expectSession() {
    const session = this.state.session;
    if (!session) throw new Error("no open session");
    return session;
  }
}

export async function boot(): Promise<void> {
  const doc = globalThis.document;
  const root = doc.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const params = new URLSearchParams(globalThis.location.search);
  const ballotRef = params.get("ballot") ?? "ward-49";
  const api = new ApiClient(new FetchTransport(params.get("api") ?? ""));
  const geo = await (await fetch("wards-geo.json")).json();
  const app = new App(doc, root, api);
  await app.start(ballotRef, geo);
}
