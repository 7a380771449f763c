import { HttpApi } from "./api.js";
import { TunerController } from "./controller.js";
import { renderParameterPanel, renderResultPanel, renderStageViewer } from "./render.js";
import { Store } from "./store.js";
import { identity } from "./zoompan.js";
import type { ViewTransform } from "./zoompan.js";

const store = new Store();
const controller = new TunerController(new HttpApi(), store);

let view: ViewTransform = identity();

const paramsRoot = document.getElementById("params")!;
const viewerRoot = document.getElementById("viewer")!;
const resultRoot = document.getElementById("result")!;
const uploadInput = document.getElementById("upload") as HTMLInputElement;
const uploadStatus = document.getElementById("upload-status")!;

function redraw(): void {
  renderParameterPanel(paramsRoot, controller);
  renderStageViewer(viewerRoot, controller, {
    view,
    onViewChange: (v) => {
      view = v;
      redraw();
    },
  });
  renderResultPanel(resultRoot, store);
}

store.subscribe(redraw);
redraw();

uploadInput.addEventListener("change", async () => {
  const file = uploadInput.files?.[0];
  if (!file) return;
  uploadStatus.textContent = "uploading...";
  try {
    await controller.uploadImage(file, file.name);
    uploadStatus.textContent = `${file.name} (${store.get().imageWidth}x${store.get().imageHeight})`;
  } catch (err) {
    uploadStatus.textContent = `upload failed: ${err}`;
  }
});
