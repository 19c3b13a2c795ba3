// The UI's only geometry math: mapping between canvas pixels and layout
// coordinates, and turning covariance matrices into drawable ellipses.

import type { LayoutKey } from "./api.js";

export type Bounds = { x0: number; y0: number; x1: number; y1: number };

export function layoutBounds(keys: LayoutKey[]): Bounds {
    let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
    for (const k of keys) {
        x0 = Math.min(x0, k.x - k.w / 2);
        y0 = Math.min(y0, k.y - k.h / 2);
        x1 = Math.max(x1, k.x + k.w / 2);
        y1 = Math.max(y1, k.y + k.h / 2);
    }
    return { x0, y0, x1, y1 };
}

export type ViewTransform = {
    scaleX: number;
    scaleY: number;
    offsetX: number;
    offsetY: number;
};

// Canvas rectangle (CSS pixels) -> layout coordinate transform.
export function viewTransform(
    bounds: Bounds,
    canvasWidth: number,
    canvasHeight: number,
): ViewTransform {
    return {
        scaleX: canvasWidth / (bounds.x1 - bounds.x0),
        scaleY: canvasHeight / (bounds.y1 - bounds.y0),
        offsetX: bounds.x0,
        offsetY: bounds.y0,
    };
}

export function pointerToLayout(
    t: ViewTransform,
    pointerX: number,
    pointerY: number,
): { x: number; y: number } {
    return {
        x: t.offsetX + pointerX / t.scaleX,
        y: t.offsetY + pointerY / t.scaleY,
    };
}

export function layoutToCanvas(
    t: ViewTransform,
    x: number,
    y: number,
): { x: number; y: number } {
    return {
        x: (x - t.offsetX) * t.scaleX,
        y: (y - t.offsetY) * t.scaleY,
    };
}

export type Ellipse = {
    rx: number; // 1-sigma radius along the major axis
    ry: number; // 1-sigma radius along the minor axis
    angle: number; // major-axis rotation, radians
};

// 1-sigma ellipse of a symmetric 2x2 covariance via its eigendecomposition.
export function ellipseFromCovariance(cov: number[][]): Ellipse | null {
    const a = cov[0][0];
    const b = cov[0][1];
    const c = cov[1][1];
    const tr = a + c;
    const diff = a - c;
    const disc = Math.sqrt(diff * diff / 4 + b * b);
    const l1 = tr / 2 + disc;
    const l2 = tr / 2 - disc;
    if (!(l1 > 0) || !(l2 > 0)) return null;
    const angle = Math.abs(b) < 1e-15 && diff >= 0 ? 0 : 0.5 * Math.atan2(2 * b, diff);
    return { rx: Math.sqrt(l1), ry: Math.sqrt(l2), angle };
}
