import { fmt, fmtSize } from './format.js';
import type { PinnedPoint } from './state.js';

/** One frontier sample: both tasks' predictions at first-task weight p. */
export interface FrontierSample {
    p: number;
    first: number;
    second: number;
}

export interface ObservedPair {
    first: number;
    second: number;
}

export interface ChartData {
    n: number;
    samples: FrontierSample[];
    current: { p: number; first: number; second: number } | null;
    observed: ObservedPair[];
    observedN: number | null;
    pins: readonly PinnedPoint[];
    axisLabels: [string, string];
}

const WIDTH = 520;
const HEIGHT = 420;
const PAD = 52;

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
    if (hi === lo) {
        return (outLo + outHi) / 2;
    }
    return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

/**
 * Hand-rolled SVG scatter of the trade-off curve: x is the first task's
 * predicted value, y the second's, parametrized by the weighting. All
 * numbers come in pre-computed; this module only draws.
 */
export class FrontierChart {
    constructor(private readonly host: HTMLElement) {}

    clear(message: string): void {
        this.host.innerHTML = `<div class="chart-empty">${message}</div>`;
    }

    render(data: ChartData): void {
        const xs: number[] = [];
        const ys: number[] = [];
        for (const s of data.samples) {
            xs.push(s.first);
            ys.push(s.second);
        }
        for (const o of data.observed) {
            xs.push(o.first);
            ys.push(o.second);
        }
        for (const pin of data.pins) {
            xs.push(pin.first.value);
            ys.push(pin.second.value);
        }
        if (data.current) {
            xs.push(data.current.first);
            ys.push(data.current.second);
        }
        if (xs.length === 0) {
            this.clear('no data');
            return;
        }
        const [xLo, xHi] = [Math.min(...xs), Math.max(...xs)];
        const [yLo, yHi] = [Math.min(...ys), Math.max(...ys)];
        const sx = (v: number) => scale(v, xLo, xHi, PAD, WIDTH - PAD / 3);
        const sy = (v: number) => scale(v, yLo, yHi, HEIGHT - PAD, PAD / 3);

        const parts: string[] = [];
        parts.push(
            `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="trade-off frontier">`,
            `<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD / 3}" y2="${HEIGHT - PAD}"/>`,
            `<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${PAD}" y2="${PAD / 3}"/>`,
            `<text class="axis-label" x="${WIDTH / 2}" y="${HEIGHT - 12}">${data.axisLabels[0]}</text>`,
            `<text class="axis-label" transform="rotate(-90)" x="${-HEIGHT / 2}" y="16">${data.axisLabels[1]}</text>`,
            `<text class="axis-tick" x="${PAD}" y="${HEIGHT - PAD + 16}">${fmt(xLo, 4)}</text>`,
            `<text class="axis-tick" x="${WIDTH - PAD}" y="${HEIGHT - PAD + 16}">${fmt(xHi, 4)}</text>`,
            `<text class="axis-tick" x="${PAD - 4}" y="${HEIGHT - PAD}" text-anchor="end">${fmt(yLo, 4)}</text>`,
            `<text class="axis-tick" x="${PAD - 4}" y="${PAD / 3 + 10}" text-anchor="end">${fmt(yHi, 4)}</text>`,
        );

        if (data.samples.length > 1) {
            const path = data.samples
                .map((s, i) => `${i === 0 ? 'M' : 'L'}${sx(s.first).toFixed(1)},${sy(s.second).toFixed(1)}`)
                .join(' ');
            parts.push(`<path class="frontier" d="${path}"/>`);
        }
        for (const o of data.observed) {
            parts.push(
                `<circle class="observed" cx="${sx(o.first).toFixed(1)}" cy="${sy(o.second).toFixed(1)}" r="4"/>`,
            );
        }
        for (const [i, pin] of data.pins.entries()) {
            parts.push(
                `<g class="pin" data-pin="${i}">` +
                    `<rect x="${(sx(pin.first.value) - 4).toFixed(1)}" y="${(sy(pin.second.value) - 4).toFixed(1)}" width="8" height="8"/>` +
                    `</g>`,
            );
        }
        if (data.current) {
            parts.push(
                `<circle class="current" cx="${sx(data.current.first).toFixed(1)}" cy="${sy(data.current.second).toFixed(1)}" r="6"/>`,
            );
        }
        const caption =
            data.observedN === null
                ? `frontier at N=${fmtSize(data.n)}`
                : `frontier at N=${fmtSize(data.n)}; observed points at N=${fmtSize(data.observedN)}`;
        parts.push(`<text class="caption" x="${WIDTH / 2}" y="18">${caption}</text>`);
        parts.push('</svg>');
        this.host.innerHTML = parts.join('');
    }
}
