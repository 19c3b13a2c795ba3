// Wiring: one canvas keyboard, one candidate bar, live model overlays.
// All scoring happens on the service; this file only routes events.

import { DecoderClient, LayoutKey, ModelDoc } from "./api.js";
import { layoutBounds, pointerToLayout, viewTransform } from "./geometry.js";
import { renderCandidates, renderKeyboard } from "./keyboard.js";
import {
    appendTouch,
    applyDecode,
    commitChoice,
    completeCommit,
    initialState,
    modelRefreshed,
    removeLastTouch,
    setCovariance,
    setSigma,
    toggleOverlay,
} from "./state.js";

const client = new DecoderClient("");
const state = initialState();
let keys: LayoutKey[] = [];
let model: ModelDoc | null = null;

const canvas = document.getElementById("keyboard") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const candidateBar = document.getElementById("candidates")!;
const committedEl = document.getElementById("committed")!;
const statusEl = document.getElementById("status")!;
const sigmaSlider = document.getElementById("sigma") as HTMLInputElement;
const sigmaLabel = document.getElementById("sigma-label")!;
const covToggle = document.getElementById("covariance") as HTMLInputElement;

function transform() {
    return viewTransform(layoutBounds(keys), canvas.width, canvas.height);
}

function redraw() {
    renderKeyboard(ctx, keys, transform(), state, model);
    renderCandidates(candidateBar, state, (word) => void commit(word));
    committedEl.textContent = state.committedText;
    statusEl.textContent = state.staleModel ? "model out of date - commit to refresh" : "";
}

let inflight: AbortController | null = null;

async function requestDecode(seq: number) {
    if (!state.sessionId || state.buffer.length === 0) return;
    inflight?.abort();
    const controller = new AbortController();
    inflight = controller;
    try {
        const result = await client.decode(
            state.sessionId,
            state.buffer.slice(),
            controller.signal,
        );
        if (applyDecode(state, seq, result)) redraw();
    } catch (err) {
        if (!controller.signal.aborted) {
            statusEl.textContent = `service unreachable: ${err}`;
        }
    } finally {
        if (inflight === controller) inflight = null;
    }
}

async function refreshModel() {
    if (!state.sessionId) return;
    model = await client.getModel(state.sessionId);
    modelRefreshed(state);
    redraw();
}

async function commit(word: string | null = null) {
    if (!state.sessionId) return;
    const choice = word ?? commitChoice(state);
    if (!choice) return;
    const touches = completeCommit(state, choice);
    redraw();
    await client.commit(state.sessionId, choice, touches);
    await refreshModel();
}

canvas.addEventListener("pointerdown", (event) => {
    const rect = canvas.getBoundingClientRect();
    const point = pointerToLayout(
        transform(),
        ((event.clientX - rect.left) * canvas.width) / rect.width,
        ((event.clientY - rect.top) * canvas.height) / rect.height,
    );
    const seq = appendTouch(state, point);
    redraw();
    void requestDecode(seq);
});

document.addEventListener("keydown", (event) => {
    if (event.key === " " || event.key === "Enter") {
        event.preventDefault();
        void commit();
    } else if (event.key === "Backspace") {
        event.preventDefault();
        const seq = removeLastTouch(state);
        redraw();
        if (seq !== null) void requestDecode(seq);
    }
});

sigmaSlider.addEventListener("input", async () => {
    const sigma = Number(sigmaSlider.value) / 100;
    sigmaLabel.textContent = sigma.toFixed(2);
    setSigma(state, sigma);
    if (state.sessionId) {
        await client.setConfig(state.sessionId, { sigma0: sigma });
        await refreshModel();
    }
});

covToggle.addEventListener("change", async () => {
    setCovariance(state, covToggle.checked);
    if (state.sessionId) {
        await client.setConfig(state.sessionId, { covariance_enabled: covToggle.checked });
        await refreshModel();
    }
});

for (const name of ["offsets", "clusters", "ellipses", "rawTouches"] as const) {
    const box = document.getElementById(`overlay-${name}`) as HTMLInputElement;
    box.addEventListener("change", () => {
        toggleOverlay(state, name);
        redraw();
    });
}

async function boot() {
    try {
        keys = await client.getLayout();
        state.sessionId = await client.createSession();
        await refreshModel();
        statusEl.textContent = "";
    } catch (err) {
        statusEl.textContent = `service unreachable: ${err}`;
        return;
    }
    redraw();
}

void boot();
