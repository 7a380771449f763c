import { ERROR_GUIDANCE, LAYER_STAGES, LAYERS, LEGEND_BANDS, SLIDER_BOUNDS, STAGES } from "./constants.js";
import type { BoundedParam } from "./constants.js";
import { TunerController } from "./controller.js";
import type { PaneState, Store, UiState } from "./store.js";
import type { StageName } from "./types.js";
import { panBy, toCss, zoomAt } from "./zoompan.js";
import type { ViewTransform } from "./zoompan.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function slider(
  label: string,
  name: BoundedParam,
  value: number,
  onInput: (v: number) => void,
): HTMLElement {
  const bounds = SLIDER_BOUNDS[name];
  const wrap = el("label", "slider");
  const caption = el("span", "slider-label", label);
  const input = el("input");
  input.type = "range";
  input.min = String(bounds.min);
  input.max = String(bounds.max);
  input.step = String(bounds.step);
  input.value = String(value);
  const readout = el("span", "slider-value", String(value));
  input.addEventListener("input", () => {
    readout.textContent = input.value;
    onInput(Number(input.value));
  });
  wrap.append(caption, input, readout);
  return wrap;
}

function numberField(label: string, value: number, onChange: (v: number) => void): HTMLElement {
  const wrap = el("label", "field");
  wrap.append(el("span", "slider-label", label));
  const input = el("input");
  input.type = "number";
  input.value = String(value);
  input.min = "1";
  input.addEventListener("change", () => onChange(Number(input.value)));
  wrap.append(input);
  return wrap;
}

export function renderParameterPanel(root: HTMLElement, ctl: TunerController): void {
  const state = ctl.store.get();
  root.replaceChildren();
  root.append(el("h2", "", "Parameters"));

  const modeWrap = el("div", "mode-toggle");
  for (const mode of ["stitched", "averaged"] as const) {
    const btn = el("button", state.config.mode === mode ? "active" : "", mode);
    btn.addEventListener("click", () => ctl.setParam("mode", mode));
    modeWrap.append(btn);
  }
  root.append(modeWrap);

  LAYERS.forEach((layerName, i) => {
    const box = el("fieldset", "layer-box");
    box.append(el("legend", "", `${layerName} layer`));
    const lp = state.config.layers[i];
    box.append(
      slider("spatial width", "sigma_s", lp.bilateral.sigma_s, (v) =>
        ctl.setParam(`layers.${i}.bilateral.sigma_s`, v),
      ),
      slider("range width", "sigma_r", lp.bilateral.sigma_r, (v) =>
        ctl.setParam(`layers.${i}.bilateral.sigma_r`, v),
      ),
      slider("strel radius", "strel_radius", lp.seg.strel_radius, (v) =>
        ctl.setParam(`layers.${i}.seg.strel_radius`, v),
      ),
    );
    root.append(box);
  });

  const cal = state.config.calibration;
  const calBox = el("fieldset", "layer-box");
  calBox.append(el("legend", "", "classification"));
  calBox.append(
    slider("convex threshold", "convex_threshold", cal.convex_threshold, (v) =>
      ctl.setParam("calibration.convex_threshold", v),
    ),
    slider("small threshold", "small_threshold", cal.small_threshold, (v) =>
      ctl.setParam("calibration.small_threshold", v),
    ),
    slider("large threshold", "large_threshold", cal.large_threshold, (v) =>
      ctl.setParam("calibration.large_threshold", v),
    ),
    numberField("calibration ball area (px)", cal.ball_area_px, (v) =>
      ctl.setParam("calibration.ball_area_px", v),
    ),
  );
  root.append(calBox);

  const problems = Object.entries(state.validation);
  if (problems.length) {
    const list = el("ul", "validation-errors");
    for (const [path, message] of problems) {
      list.append(el("li", "", `${path}: ${message}`));
    }
    root.append(list);
  }
}

function paneCard(
  title: string,
  pane: PaneState,
  stale: boolean,
  view: ViewTransform,
): HTMLElement {
  const card = el("div", "pane");
  const head = el("div", "pane-head");
  head.append(el("span", "", title));
  if (pane.loading) head.append(el("span", "badge loading", "computing"));
  else if (stale) head.append(el("span", "badge stale", "stale"));
  card.append(head);

  if (pane.error) {
    const box = el("div", "error-card");
    const where = pane.error.layer ? ` (${pane.error.layer} layer)` : "";
    box.append(el("strong", "", `${pane.error.error}${where}`));
    const hint = ERROR_GUIDANCE[pane.error.error];
    if (hint) box.append(el("p", "", hint));
    card.append(box);
  } else if (pane.url) {
    const viewport = el("div", "viewport");
    const img = el("img");
    img.src = pane.url;
    img.draggable = false;
    img.style.transform = toCss(view);
    img.style.transformOrigin = "0 0";
    viewport.append(img);
    card.append(viewport);
  } else {
    card.append(el("div", "placeholder", "no image yet"));
  }
  return card;
}

function blendCard(state: UiState, stale: boolean, view: ViewTransform): HTMLElement {
  const card = el("div", "pane");
  const head = el("div", "pane-head");
  head.append(
    el(
      "span",
      "",
      `${state.left.stage}${state.left.layer ? " / " + state.left.layer : ""} + result blend`,
    ),
  );
  if (state.left.loading || state.right.loading) head.append(el("span", "badge loading", "computing"));
  else if (stale) head.append(el("span", "badge stale", "stale"));
  card.append(head);
  const viewport = el("div", "viewport");
  for (const [pane, opacity] of [
    [state.left, "1"],
    [state.right, "0.5"],
  ] as const) {
    if (!pane.url) continue;
    const img = el("img", "blend-layer");
    img.src = pane.url;
    img.draggable = false;
    img.style.opacity = opacity;
    img.style.transform = toCss(view);
    img.style.transformOrigin = "0 0";
    viewport.append(img);
  }
  card.append(viewport);
  return card;
}

export interface ViewerHooks {
  view: ViewTransform;
  onViewChange: (v: ViewTransform) => void;
}

export function renderStageViewer(
  root: HTMLElement,
  ctl: TunerController,
  hooks: ViewerHooks,
): void {
  const state = ctl.store.get();
  root.replaceChildren();

  const controls = el("div", "stage-controls");
  const stageSelect = el("select");
  for (const stage of STAGES) {
    const opt = el("option", "", stage);
    opt.value = stage;
    if (stage === state.left.stage) opt.selected = true;
    stageSelect.append(opt);
  }
  const layerSelect = el("select");
  for (const name of ["(all)", ...LAYERS]) {
    const opt = el("option", "", name);
    opt.value = name === "(all)" ? "" : name;
    if ((state.left.layer ?? "") === opt.value) opt.selected = true;
    layerSelect.append(opt);
  }
  layerSelect.disabled = !(LAYER_STAGES as readonly string[]).includes(state.left.stage);
  const onPick = () => {
    const layer = (layerSelect.value || null) as "top" | "middle" | "bottom" | null;
    void ctl.selectStage(stageSelect.value as StageName, layer);
  };
  stageSelect.addEventListener("change", onPick);
  layerSelect.addEventListener("change", onPick);
  const blendBtn = el(
    "button",
    state.comparison === "overlay-blend" ? "active" : "",
    state.comparison === "overlay-blend" ? "side-by-side view" : "blend view",
  );
  blendBtn.addEventListener("click", () => {
    ctl.store.update({
      comparison: state.comparison === "overlay-blend" ? "side-by-side" : "overlay-blend",
    });
  });
  controls.append(
    el("span", "", "stage:"),
    stageSelect,
    el("span", "", "layer:"),
    layerSelect,
    blendBtn,
  );
  root.append(controls);

  const panes = el("div", "panes");
  if (state.comparison === "overlay-blend") {
    panes.classList.add("single");
    panes.append(
      blendCard(state, ctl.store.isStale(state.right.digest), hooks.view),
    );
  } else {
    panes.append(
      paneCard(
        `${state.left.stage}${state.left.layer ? " / " + state.left.layer : ""}`,
        state.left,
        ctl.store.isStale(state.left.digest),
        hooks.view,
      ),
      paneCard("color-coded result", state.right, ctl.store.isStale(state.right.digest), hooks.view),
    );
  }
  root.append(panes);

  let dragging = false;
  let last: [number, number] = [0, 0];
  panes.addEventListener("pointerdown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
  });
  panes.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    hooks.onViewChange(panBy(hooks.view, ev.clientX - last[0], ev.clientY - last[1]));
    last = [ev.clientX, ev.clientY];
  });
  panes.addEventListener("pointerup", () => {
    dragging = false;
  });
  panes.addEventListener(
    "wheel",
    (ev) => {
      ev.preventDefault();
      const rect = panes.getBoundingClientRect();
      const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
      hooks.onViewChange(
        zoomAt(hooks.view, ev.clientX - rect.left, ev.clientY - rect.top, factor),
      );
    },
    { passive: false },
  );
}

export function renderResultPanel(root: HTMLElement, store: Store): void {
  const state: UiState = store.get();
  root.replaceChildren();
  root.append(el("h2", "", "Result"));
  const res = state.result;

  if (res.error) {
    const box = el("div", "error-card");
    const where = res.error.layer ? ` (${res.error.layer} layer)` : "";
    box.append(el("strong", "", `${res.error.error}${where}`));
    const hint = ERROR_GUIDANCE[res.error.error];
    if (hint) box.append(el("p", "", hint));
    root.append(box);
  } else if (res.data) {
    const stale = store.isStale(res.digest);
    const chips = el("div", "pds-chips");
    const finalChip = el("span", "chip final", `PDS ${res.data.final_pds.toFixed(2)}%`);
    finalChip.title = String(res.data.final_pds);
    if (stale) finalChip.classList.add("stale");
    chips.append(finalChip);
    if (res.data.per_layer_pds) {
      res.data.per_layer_pds.forEach((v, i) => {
        const chip = el("span", "chip", `${LAYERS[i]} ${v.toFixed(2)}%`);
        chip.title = String(v);
        if (stale) chip.classList.add("stale");
        chips.append(chip);
      });
    }
    root.append(chips);
    if (stale) root.append(el("p", "stale-note", "recomputing for the current parameters..."));

    const table = el("table", "categories");
    const head = el("tr");
    head.append(el("th"), el("th", "", "count"), el("th", "", "area (px)"));
    table.append(head);
    for (const cat of ["small", "typical", "large", "convex_fail"]) {
      const row = el("tr");
      row.append(
        el("td", "", cat),
        el("td", "", String(res.data.category_counts[cat] ?? 0)),
        el("td", "", String(res.data.category_areas[cat] ?? 0)),
      );
      table.append(row);
    }
    root.append(table);
  } else if (res.loading) {
    root.append(el("p", "", "computing..."));
  } else {
    root.append(el("p", "", "upload an image to begin"));
  }

  const legend = el("div", "legend");
  legend.append(el("h3", "", "size coding key"));
  for (const band of LEGEND_BANDS) {
    const row = el("div", "legend-row");
    const swatch = el("span", "swatch");
    swatch.style.background = band.css;
    row.append(swatch, el("span", "", `${band.name}: ${band.meaning}`));
    legend.append(row);
  }
  root.append(legend);
}
