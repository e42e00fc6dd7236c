import { boot } from "./app.js";

boot().catch((err) => {
  console.error(err);
  const root = document.getElementById("app");
  if (root) root.textContent = `Failed to load: ${err}`;
});
