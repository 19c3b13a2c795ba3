import { describe, expect, it } from "vitest";

import type { LayoutKey } from "../src/api.js";
import {
    ellipseFromCovariance,
    layoutBounds,
    layoutToCanvas,
    pointerToLayout,
    viewTransform,
} from "../src/geometry.js";

const keys: LayoutKey[] = [
    { char: "a", x: 20, y: 30, w: 40, h: 60 },
    { char: "b", x: 380, y: 150, w: 40, h: 60 },
];

describe("layout bounds and view transform", () => {
    it("encloses all key rectangles", () => {
        const b = layoutBounds(keys);
        expect(b).toEqual({ x0: 0, y0: 0, x1: 400, y1: 180 });
    });

    it("round-trips pointer and layout coordinates", () => {
        const t = viewTransform(layoutBounds(keys), 800, 360);
        const p = pointerToLayout(t, 800, 360);
        expect(p.x).toBeCloseTo(400, 9);
        expect(p.y).toBeCloseTo(180, 9);
        const back = layoutToCanvas(t, p.x, p.y);
        expect(back.x).toBeCloseTo(800, 9);
        expect(back.y).toBeCloseTo(360, 9);
    });

    it("maps the canvas center to the layout center at any scale", () => {
        const t = viewTransform(layoutBounds(keys), 457, 123);
        const p = pointerToLayout(t, 457 / 2, 123 / 2);
        expect(p.x).toBeCloseTo(200, 9);
        expect(p.y).toBeCloseTo(90, 9);
    });
});

describe("covariance ellipses", () => {
    it("isotropic covariance gives a circle", () => {
        const e = ellipseFromCovariance([
            [0.04, 0],
            [0, 0.04],
        ])!;
        expect(e.rx).toBeCloseTo(0.2, 12);
        expect(e.ry).toBeCloseTo(0.2, 12);
    });

    it("4:1 variance gives 2:1 axes", () => {
        const e = ellipseFromCovariance([
            [0.16, 0],
            [0, 0.04],
        ])!;
        expect(e.rx / e.ry).toBeCloseTo(2.0, 9);
        expect(e.angle).toBeCloseTo(0, 12);
    });

    it("correlated covariance rotates the major axis", () => {
        const e = ellipseFromCovariance([
            [0.05, 0.03],
            [0.03, 0.05],
        ])!;
        expect(e.angle).toBeCloseTo(Math.PI / 4, 9);
        expect(e.rx).toBeCloseTo(Math.sqrt(0.08), 9);
        expect(e.ry).toBeCloseTo(Math.sqrt(0.02), 9);
    });

    it("rejects non-positive-definite matrices", () => {
        expect(
            ellipseFromCovariance([
                [0.04, 0.06],
                [0.06, 0.09],
            ]),
        ).toBeNull();
        expect(
            ellipseFromCovariance([
                [0, 0],
                [0, 0],
            ]),
        ).toBeNull();
    });
});
