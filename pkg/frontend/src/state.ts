// UI state and its transitions, kept free of DOM and network so the logic
// is directly testable. Candidates are displayed exactly in service order.

import type { DecodeResponse, TouchPayload } from "./api.js";

export type Overlays = {
    offsets: boolean;
    clusters: boolean;
    ellipses: boolean;
    rawTouches: boolean;
};

export type UiState = {
    sessionId: string | null;
    buffer: TouchPayload[];
    result: DecodeResponse | null;
    committedText: string;
    overlays: Overlays;
    sigma: number;
    covariance: boolean;
    // Raw touch memory for the scatter overlay. Client-side only: these
    // points are never sent anywhere beyond the decode/commit requests
    // the user's typing already produced.
    scatter: TouchPayload[];
    // Latest-wins decode sequencing: only the newest request may apply.
    requestSeq: number;
    appliedSeq: number;
    staleModel: boolean;
};

export function initialState(): UiState {
    return {
        sessionId: null,
        buffer: [],
        result: null,
        committedText: "",
        overlays: { offsets: true, clusters: false, ellipses: false, rawTouches: false },
        sigma: 0.55,
        covariance: false,
        scatter: [],
        requestSeq: 0,
        appliedSeq: 0,
        staleModel: false,
    };
}

export function appendTouch(state: UiState, touch: TouchPayload): number {
    state.buffer.push(touch);
    state.scatter.push(touch);
    state.requestSeq += 1;
    return state.requestSeq;
}

export function removeLastTouch(state: UiState): number | null {
    if (state.buffer.length === 0) return null;
    state.buffer.pop();
    if (state.buffer.length === 0) {
        state.result = null;
        state.requestSeq += 1;
        state.appliedSeq = state.requestSeq;
        return null;
    }
    state.requestSeq += 1;
    return state.requestSeq;
}

// Apply a decode response unless a newer request has been issued since.
export function applyDecode(state: UiState, seq: number, result: DecodeResponse): boolean {
    if (seq < state.requestSeq || seq <= state.appliedSeq) return false;
    state.appliedSeq = seq;
    state.result = result;
    return true;
}

// The word a space commits: the top candidate under autocorrect, otherwise
// the literal. Returns null when there is nothing to commit.
export function commitChoice(state: UiState): string | null {
    if (!state.result || state.buffer.length === 0) return null;
    return state.result.autocorrected && state.result.ranked.length > 0
        ? state.result.ranked[0].word
        : state.result.literal.word;
}

export function completeCommit(state: UiState, word: string): TouchPayload[] {
    const touches = state.buffer;
    state.buffer = [];
    state.result = null;
    state.committedText += (state.committedText ? " " : "") + word;
    state.requestSeq += 1;
    state.appliedSeq = state.requestSeq;
    return touches;
}

export function setSigma(state: UiState, sigma: number): void {
    state.sigma = sigma;
    state.staleModel = true;
}

export function setCovariance(state: UiState, enabled: boolean): void {
    state.covariance = enabled;
    state.staleModel = true;
}

export function modelRefreshed(state: UiState): void {
    state.staleModel = false;
}

export function toggleOverlay(state: UiState, name: keyof Overlays): void {
    state.overlays[name] = !state.overlays[name];
}
