/** Browser entry point: wire the controller to the page. */

import { ApiClient } from "./api.js";
import { App, type AppElements } from "./app.js";

function mustFind(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node;
}

const elements: AppElements = {
  graph: mustFind("graph"),
  form: mustFind("form-panel"),
  prompts: mustFind("prompt-panel"),
  whatif: mustFind("whatif-panel"),
  banner: mustFind("banner"),
};

const app = new App(new ApiClient(""), elements);
void app.start().catch(() => {
  // the banner already shows the failure and offers a retry
});
