// Two-list sort view: drag projects between "your priorities" and the
// unsorted pool, or use the keyboard buttons, which edit the same model.

import type { PublicBallot } from "../api.js";
import type { SortControl } from "../controls.js";

function projectName(ballot: PublicBallot, id: string): string {
  return ballot.projects.find((p) => p.id === id)?.name ?? id;
}

function listItem(
  doc: Document,
  ballot: PublicBallot,
  control: SortControl,
  id: string,
  inSorted: boolean,
): HTMLElement {
  const li = doc.createElement("li");
  li.className = "sort-item";
  li.dataset.project = id;
  li.draggable = true;
  li.addEventListener("dragstart", (ev) => {
    (ev as DragEvent).dataTransfer?.setData("text/plain", id);
  });

  const label = doc.createElement("span");
  label.textContent = projectName(ballot, id);
  li.appendChild(label);

  const buttons = doc.createElement("span");
  buttons.className = "sort-buttons";
  const mk = (text: string, title: string, onClick: () => void) => {
    const b = doc.createElement("button");
    b.type = "button";
    b.textContent = text;
    b.title = title;
    b.setAttribute("aria-label", `${title}: ${projectName(ballot, id)}`);
    b.addEventListener("click", onClick);
    buttons.appendChild(b);
    return b;
  };
  if (inSorted) {
    mk("↑", "Move up", () => control.keyUp(id));
    mk("↓", "Move down", () => control.keyDown(id));
    mk("✕", "Remove from ranking", () => control.keyRemove(id));
  } else {
    mk("+", "Add to ranking", () => control.keyAdd(id));
  }
  li.appendChild(buttons);
  return li;
}

export function renderSortView(
  doc: Document,
  container: HTMLElement,
  ballot: PublicBallot,
  control: SortControl,
  onSubmit: () => void,
): void {
  container.innerHTML = "";
  const heading = doc.createElement("h2");
  heading.textContent = "Order projects by how much they matter to you";
  container.appendChild(heading);

  const hint = doc.createElement("p");
  hint.className = "hint";
  hint.textContent = "Rank as many or as few as you like; drag between lists or use the buttons.";
  container.appendChild(hint);

  const wrap = doc.createElement("div");
  wrap.className = "sort-lists";

  const makeList = (title: string, ids: string[], sortedList: boolean) => {
    const section = doc.createElement("section");
    section.className = sortedList ? "sorted-list" : "unsorted-list";
    const h = doc.createElement("h3");
    h.textContent = title;
    section.appendChild(h);
    const ul = doc.createElement("ul");
    ul.dataset.role = sortedList ? "sorted" : "unsorted";
    ul.addEventListener("dragover", (ev) => ev.preventDefault());
    ul.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const id = (ev as DragEvent).dataTransfer?.getData("text/plain");
      if (!id) return;
      if (sortedList) control.moveToSorted(id, control.sorted.length);
      else control.moveToUnsorted(id);
    });
    for (const id of ids) ul.appendChild(listItem(doc, ballot, control, id, sortedList));
    section.appendChild(ul);
    return section;
  };

  wrap.appendChild(makeList("Your priorities", control.sorted, true));
  wrap.appendChild(makeList("Unsorted projects", control.unsorted, false));
  container.appendChild(wrap);

  const submit = doc.createElement("button");
  submit.type = "button";
  submit.className = "primary";
  submit.dataset.role = "submit-sort";
  submit.textContent = "Save order and continue";
  submit.addEventListener("click", onSubmit);
  container.appendChild(submit);
}
