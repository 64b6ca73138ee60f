import type { BundleBody, PredictResponse } from './types.js';

// Slider quantization keeps the request volume bounded: p moves in 0.01
// steps, n in 1% log steps over the observed size range extended 10x.
export const P_MIN = 0.05;
export const P_MAX = 0.95;
export const P_STEP = 0.01;
export const SIZE_LOG_STEP = 1.01;
export const SIZE_RANGE_EXTENSION = 10;

export function quantizeP(raw: number): number {
    const clamped = Math.min(P_MAX, Math.max(P_MIN, raw));
    return Number((Math.round(clamped / P_STEP) * P_STEP).toFixed(2));
}

export function complementOf(p: number): number {
    return Number((1 - p).toFixed(2));
}

/** Log-scale size axis derived from the bundle's observed sizes. */
export class SizeAxis {
    readonly minN: number;
    readonly maxIndex: number;

    constructor(observedMin: number, observedMax: number) {
        if (!(observedMin > 0) || !(observedMax >= observedMin)) {
            throw new Error(`invalid observed size range [${observedMin}, ${observedMax}]`);
        }
        this.minN = observedMin;
        const top = observedMax * SIZE_RANGE_EXTENSION;
        this.maxIndex = Math.max(1, Math.round(Math.log(top / observedMin) / Math.log(SIZE_LOG_STEP)));
    }

    sizeAt(index: number): number {
        const clamped = Math.min(this.maxIndex, Math.max(0, Math.round(index)));
        return this.minN * SIZE_LOG_STEP ** clamped;
    }

    indexNear(n: number): number {
        const raw = Math.log(n / this.minN) / Math.log(SIZE_LOG_STEP);
        return Math.min(this.maxIndex, Math.max(0, Math.round(raw)));
    }
}

export function observedSizeRange(body: BundleBody): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (const laws of Object.values(body.tasks)) {
        for (const [, n] of laws.observations.map((o) => [o[0], o[1]] as const)) {
            lo = Math.min(lo, n);
            hi = Math.max(hi, n);
        }
    }
    if (!Number.isFinite(lo)) {
        // Bundle without embedded observations: fall back to a generic span.
        return [2e7, 1e9];
    }
    return [lo, hi];
}

/** A what-if point frozen at pin time; later slider moves cannot touch it. */
export interface PinnedPoint {
    readonly p: number;
    readonly n: number;
    readonly first: Readonly<PredictResponse>;
    readonly second: Readonly<PredictResponse>;
}

export class ExplorerState {
    p: number = 0.5;
    sizeIndex: number;
    firstTask: string;
    secondTask: string;
    private pinned: PinnedPoint[] = [];
    private tokens: Map<string, number> = new Map();

    constructor(
        readonly axis: SizeAxis,
        tasks: readonly string[],
    ) {
        if (tasks.length < 2) {
            throw new Error('explorer needs at least two fitted tasks');
        }
        this.firstTask = tasks[0];
        this.secondTask = tasks[1];
        this.sizeIndex = axis.maxIndex;
    }

    get n(): number {
        return this.axis.sizeAt(this.sizeIndex);
    }

    setP(raw: number): void {
        this.p = quantizeP(raw);
    }

    setSizeIndex(index: number): void {
        this.sizeIndex = Math.min(this.axis.maxIndex, Math.max(0, Math.round(index)));
    }

    get pins(): readonly PinnedPoint[] {
        return this.pinned;
    }

    pin(first: PredictResponse, second: PredictResponse): PinnedPoint {
        const point: PinnedPoint = Object.freeze({
            p: this.p,
            n: this.n,
            first: Object.freeze({ ...first }),
            second: Object.freeze({ ...second }),
        });
        this.pinned = [...this.pinned, point];
        return point;
    }

    /**
     * Last-write-wins request guard: each widget keeps only the newest
     * in-flight request; stale responses are dropped on arrival.
     */
    nextToken(widget: string): number {
        const token = (this.tokens.get(widget) ?? 0) + 1;
        this.tokens.set(widget, token);
        return token;
    }

    isCurrent(widget: string, token: number): boolean {
        return this.tokens.get(widget) === token;
    }
}
