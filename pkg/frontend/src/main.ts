import { ApiClient } from "./api";
import { App, type AppElements } from "./app";

function required<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element as T;
}

const elements: AppElements = {
  chips: required("chips"),
  runs: required("runs"),
  violins: required("violins"),
  table: required("table"),
  embedding: required("embedding"),
  status: required("status"),
  exportLink: required<HTMLAnchorElement>("export-link"),
};

const app = new App(new ApiClient(""), elements, window);
app.start().catch((error) => {
  elements.status.textContent = `failed to load workspace: ${error}`;
});
