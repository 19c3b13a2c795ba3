// Typed client for the decoder service. The schema here is the contract;
// the UI never computes a score itself.

export type LayoutKey = {
    char: string;
    x: number;
    y: number;
    w: number;
    h: number;
};

export type Candidate = {
    word: string;
    sm: number;
    lm: number;
    total: number;
    edit_count: number;
};

export type DecodeResponse = {
    literal: Candidate;
    ranked: Candidate[];
    autocorrected: boolean;
};

export type ClusterDoc = {
    keys: string[];
    rect: [number, number, number, number];
    offset: [number, number];
    n: number;
    cov: number[][] | null;
    cov_valid: boolean;
};

export type ModelDoc = {
    offsets: Record<string, [number, number]>;
    personalized_centers: Record<string, [number, number]>;
    clusters: ClusterDoc[];
    global_cov: number[][] | null;
    sigma_global: number;
    params: {
        sigma0: number;
        covariance_enabled: boolean;
        [extra: string]: unknown;
    };
    commits: number;
};

export type TouchPayload = { x: number; y: number };

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class DecoderClient {
    constructor(
        private baseUrl: string = "",
        private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async get<T>(path: string): Promise<T> {
        const resp = await this.fetchImpl(this.baseUrl + path);
        if (!resp.ok) throw new Error(`GET ${path}: ${resp.status}`);
        return resp.json() as Promise<T>;
    }

    private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
        const resp = await this.fetchImpl(this.baseUrl + path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
            signal,
        });
        if (!resp.ok) throw new Error(`POST ${path}: ${resp.status}`);
        return resp.json() as Promise<T>;
    }

    getLayout(): Promise<LayoutKey[]> {
        return this.get("/layout");
    }

    async createSession(): Promise<string> {
        const doc = await this.post<{ session_id: string }>("/sessions", {});
        return doc.session_id;
    }

    decode(
        sessionId: string,
        touches: TouchPayload[],
        signal?: AbortSignal,
    ): Promise<DecodeResponse> {
        return this.post(`/sessions/${sessionId}/decode`, { touches }, signal);
    }

    commit(sessionId: string, word: string, touches: TouchPayload[]): Promise<unknown> {
        return this.post(`/sessions/${sessionId}/commit`, { word, touches });
    }

    getModel(sessionId: string): Promise<ModelDoc> {
        return this.get(`/sessions/${sessionId}/model`);
    }

    setConfig(
        sessionId: string,
        config: { sigma0?: number; covariance_enabled?: boolean },
    ): Promise<{ ok: boolean; rebuilt: boolean }> {
        return this.post(`/sessions/${sessionId}/config`, config);
    }
}
