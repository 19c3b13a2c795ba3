// Canvas rendering. Every number drawn here comes from the service: key
// geometry from /layout, markers/rectangles/ellipses from the model dump.

import type { LayoutKey, ModelDoc } from "./api.js";
import {
    Ellipse,
    ViewTransform,
    ellipseFromCovariance,
    layoutToCanvas,
} from "./geometry.js";
import type { UiState } from "./state.js";

const CLUSTER_COLORS = [
    "rgba(66, 133, 244, 0.25)",
    "rgba(219, 68, 55, 0.25)",
    "rgba(244, 180, 0, 0.3)",
    "rgba(15, 157, 88, 0.25)",
    "rgba(171, 71, 188, 0.25)",
    "rgba(255, 112, 67, 0.3)",
    "rgba(0, 172, 193, 0.25)",
    "rgba(124, 179, 66, 0.3)",
    "rgba(94, 53, 177, 0.25)",
    "rgba(240, 98, 146, 0.3)",
];

export function renderKeyboard(
    ctx: CanvasRenderingContext2D,
    keys: LayoutKey[],
    t: ViewTransform,
    state: UiState,
    model: ModelDoc | null,
): void {
    ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

    if (model && state.overlays.clusters) {
        model.clusters.forEach((cluster, i) => {
            const [x0, y0, x1, y1] = cluster.rect;
            const p0 = layoutToCanvas(t, x0, y0);
            const p1 = layoutToCanvas(t, x1, y1);
            ctx.fillStyle = CLUSTER_COLORS[i % CLUSTER_COLORS.length];
            ctx.fillRect(p0.x, p0.y, p1.x - p0.x, p1.y - p0.y);
        });
    }

    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    for (const key of keys) {
        const p0 = layoutToCanvas(t, key.x - key.w / 2, key.y - key.h / 2);
        const p1 = layoutToCanvas(t, key.x + key.w / 2, key.y + key.h / 2);
        ctx.strokeStyle = "#888";
        ctx.lineWidth = 1;
        ctx.strokeRect(p0.x + 1, p0.y + 1, p1.x - p0.x - 2, p1.y - p0.y - 2);
        ctx.fillStyle = "#222";
        const center = layoutToCanvas(t, key.x, key.y);
        ctx.fillText(key.char, center.x, center.y);
    }

    if (model && state.overlays.rawTouches) {
        ctx.fillStyle = "rgba(0, 0, 0, 0.35)";
        for (const touch of state.scatter) {
            const p = layoutToCanvas(t, touch.x, touch.y);
            ctx.beginPath();
            ctx.arc(p.x, p.y, 2, 0, 2 * Math.PI);
            ctx.fill();
        }
    }

    if (model && state.overlays.ellipses) {
        renderEllipses(ctx, keys, t, model);
    }

    if (model && state.overlays.offsets) {
        ctx.fillStyle = "#d32";
        for (const key of keys) {
            const marker = model.personalized_centers[key.char];
            if (!marker) continue;
            const p = layoutToCanvas(t, marker[0], marker[1]);
            ctx.beginPath();
            ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
            ctx.fill();
        }
    }

    ctx.fillStyle = "rgba(40, 90, 200, 0.65)";
    for (const touch of state.buffer) {
        const p = layoutToCanvas(t, touch.x, touch.y);
        ctx.beginPath();
        ctx.arc(p.x, p.y, 5, 0, 2 * Math.PI);
        ctx.fill();
    }
}

function renderEllipses(
    ctx: CanvasRenderingContext2D,
    keys: LayoutKey[],
    t: ViewTransform,
    model: ModelDoc,
): void {
    const byChar = new Map(keys.map((k) => [k.char, k]));
    ctx.strokeStyle = "rgba(211, 50, 30, 0.8)";
    ctx.lineWidth = 1.5;
    for (const cluster of model.clusters) {
        if (!cluster.cov_valid || !cluster.cov) continue;
        const ellipse = ellipseFromCovariance(cluster.cov);
        if (!ellipse) continue;
        for (const char of cluster.keys) {
            const key = byChar.get(char);
            const marker = model.personalized_centers[char];
            if (!key || !marker) continue;
            drawEllipse(ctx, t, key, marker, ellipse);
        }
    }
}

function drawEllipse(
    ctx: CanvasRenderingContext2D,
    t: ViewTransform,
    key: LayoutKey,
    center: [number, number],
    ellipse: Ellipse,
): void {
    // Covariance lives in key-normalized units; scale onto the key's box.
    const p = layoutToCanvas(t, center[0], center[1]);
    ctx.save();
    ctx.translate(p.x, p.y);
    ctx.scale(key.w * t.scaleX, key.h * t.scaleY);
    ctx.rotate(ellipse.angle);
    ctx.beginPath();
    ctx.ellipse(0, 0, ellipse.rx, ellipse.ry, 0, 0, 2 * Math.PI);
    ctx.restore();
    ctx.stroke();
}

export function renderCandidates(
    bar: HTMLElement,
    state: UiState,
    onPick: (word: string) => void,
): void {
    bar.textContent = "";
    if (!state.result) return;
    state.result.ranked.slice(0, 5).forEach((cand, i) => {
        const el = document.createElement("button");
        el.className = "candidate" + (i === 0 && state.result!.autocorrected ? " auto" : "");
        el.textContent = cand.word;
        el.title = `sm ${cand.sm.toFixed(2)}  lm ${cand.lm.toFixed(2)}  total ${cand.total.toFixed(2)}`;
        el.addEventListener("click", () => onPick(cand.word));
        bar.appendChild(el);
    });
}
