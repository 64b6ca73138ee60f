import { ApiClient, ServiceUnreachable } from './api.js';
import { CapacityPanel } from './capacity.js';
import { FrontierChart, type FrontierSample, type ObservedPair } from './chart.js';
import { clearNumber, fmt, fmtSize, setNumber } from './format.js';
import {
    complementOf,
    ExplorerState,
    observedSizeRange,
    P_MAX,
    P_MIN,
    P_STEP,
    SizeAxis,
} from './state.js';
import type { BundleBody, PredictResponse } from './types.js';

/** First-task weights sampled for the frontier curve. */
export const CURVE_GRID: number[] = [];
for (let p = P_MIN; p <= P_MAX + 1e-9; p += 0.05) {
    CURVE_GRID.push(Number(p.toFixed(2)));
}

interface CurrentPoint {
    p: number;
    n: number;
    first: PredictResponse;
    second: PredictResponse;
}

/** Observed trade-off pairs at the embedded size nearest to n. */
export function observedPairsNear(
    body: BundleBody,
    firstTask: string,
    secondTask: string,
    n: number,
): { pairs: ObservedPair[]; observedN: number | null } {
    const first = body.tasks[firstTask]?.observations ?? [];
    const second = body.tasks[secondTask]?.observations ?? [];
    const bySecondKey = new Map<string, number>();
    for (const [p, size, y] of second) {
        bySecondKey.set(`${p.toFixed(6)}|${size}`, y);
    }
    const matches: { n: number; pair: ObservedPair }[] = [];
    for (const [p, size, y] of first) {
        const partner = bySecondKey.get(`${(1 - p).toFixed(6)}|${size}`);
        if (partner !== undefined) {
            matches.push({ n: size, pair: { first: y, second: partner } });
        }
    }
    if (matches.length === 0) {
        return { pairs: [], observedN: null };
    }
    let nearest = matches[0].n;
    for (const m of matches) {
        if (Math.abs(Math.log(m.n / n)) < Math.abs(Math.log(nearest / n))) {
            nearest = m.n;
        }
    }
    return {
        pairs: matches.filter((m) => m.n === nearest).map((m) => m.pair),
        observedN: nearest,
    };
}

export class ExplorerApp {
    state!: ExplorerState;
    private body!: BundleBody;
    private chart!: FrontierChart;
    private capacity!: CapacityPanel;
    private samples: FrontierSample[] = [];
    private current: CurrentPoint | null = null;

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
    ) {}

    private el<T extends HTMLElement>(id: string): T {
        const node = this.doc.getElementById(id);
        if (!node) {
            throw new Error(`missing element #${id}`);
        }
        return node as T;
    }

    async start(): Promise<void> {
        this.chart = new FrontierChart(this.el('chart'));
        this.capacity = new CapacityPanel(this.el('capacity'));
        let document_;
        try {
            document_ = await this.api.bundle();
        } catch (err) {
            this.showBanner(`service unreachable: ${err instanceof Error ? err.message : err}`);
            this.chart.clear('service unreachable');
            return;
        }
        this.body = document_.body;
        const tasks = Object.keys(this.body.tasks);
        const [lo, hi] = observedSizeRange(this.body);
        this.state = new ExplorerState(new SizeAxis(lo, hi), tasks);

        this.el('bundle-info').textContent =
            `${this.body.metric} on ${this.body.testset} (${this.body.direction}), ` +
            `tasks: ${tasks.join(', ')}`;
        this.populateTaskSelects(tasks);
        this.wireControls();
        this.syncControlLabels();
        await Promise.all([this.refreshCurve(), this.refreshCurrent()]);
    }

    private populateTaskSelects(tasks: string[]): void {
        const firstSel = this.el<HTMLSelectElement>('first-task');
        const secondSel = this.el<HTMLSelectElement>('second-task');
        for (const sel of [firstSel, secondSel]) {
            sel.innerHTML = '';
            for (const task of tasks) {
                const option = this.doc.createElement('option');
                option.value = task;
                option.textContent = task;
                sel.appendChild(option);
            }
        }
        firstSel.value = this.state.firstTask;
        secondSel.value = this.state.secondTask;
    }

    private wireControls(): void {
        const pSlider = this.el<HTMLInputElement>('p-slider');
        pSlider.min = String(P_MIN);
        pSlider.max = String(P_MAX);
        pSlider.step = String(P_STEP);
        pSlider.value = String(this.state.p);
        pSlider.addEventListener('input', () => {
            this.state.setP(Number(pSlider.value));
            this.syncControlLabels();
            void this.refreshCurrent();
        });

        const nSlider = this.el<HTMLInputElement>('n-slider');
        nSlider.min = '0';
        nSlider.max = String(this.state.axis.maxIndex);
        nSlider.step = '1';
        nSlider.value = String(this.state.sizeIndex);
        nSlider.addEventListener('input', () => {
            this.state.setSizeIndex(Number(nSlider.value));
            this.syncControlLabels();
            void this.refreshCurve();
            void this.refreshCurrent();
        });

        this.el<HTMLSelectElement>('first-task').addEventListener('change', (ev) => {
            this.state.firstTask = (ev.target as HTMLSelectElement).value;
            void this.refreshCurve();
            void this.refreshCurrent();
        });
        this.el<HTMLSelectElement>('second-task').addEventListener('change', (ev) => {
            this.state.secondTask = (ev.target as HTMLSelectElement).value;
            void this.refreshCurve();
            void this.refreshCurrent();
        });

        this.el('pin-button').addEventListener('click', () => this.pinCurrent());
    }

    private syncControlLabels(): void {
        this.el('p-value').textContent = fmt(this.state.p, 3);
        this.el('n-value').textContent = fmtSize(this.state.n);
        this.el('label-first').textContent = this.state.firstTask;
        this.el('label-second').textContent = this.state.secondTask;
    }

    private showBanner(message: string): void {
        const banner = this.el('banner');
        banner.textContent = message;
        banner.classList.remove('hidden');
    }

    private hideBanner(): void {
        this.el('banner').classList.add('hidden');
    }

    /** Drop all displayed numbers; stale data must never survive an outage. */
    private clearDisplays(): void {
        this.current = null;
        this.samples = [];
        clearNumber(this.el('value-first'));
        clearNumber(this.el('value-second'));
        this.capacity.disable('service unreachable');
        this.chart.clear('service unreachable');
    }

    async refreshCurrent(): Promise<void> {
        const token = this.state.nextToken('current');
        const { p } = this.state;
        const n = this.state.n;
        try {
            const [first, second] = await Promise.all([
                this.api.predict({ task: this.state.firstTask, p, n }),
                this.api.predict({ task: this.state.secondTask, p: complementOf(p), n }),
            ]);
            if (!this.state.isCurrent('current', token)) {
                return;
            }
            this.hideBanner();
            this.current = { p, n, first, second };
            setNumber(this.el('value-first'), first.value);
            setNumber(this.el('value-second'), second.value);
            this.capacity.render(first, p);
            this.redrawChart();
        } catch (err) {
            if (!this.state.isCurrent('current', token)) {
                return;
            }
            if (err instanceof ServiceUnreachable) {
                this.showBanner(`service unreachable: ${err.message}`);
                this.clearDisplays();
            } else {
                this.current = null;
                clearNumber(this.el('value-first'));
                clearNumber(this.el('value-second'));
                this.capacity.disable(err instanceof Error ? err.message : String(err));
            }
        }
    }

    async refreshCurve(): Promise<void> {
        const token = this.state.nextToken('curve');
        const n = this.state.n;
        try {
            const samples = await Promise.all(
                CURVE_GRID.map(async (p): Promise<FrontierSample> => {
                    const [first, second] = await Promise.all([
                        this.api.predict({ task: this.state.firstTask, p, n }),
                        this.api.predict({ task: this.state.secondTask, p: complementOf(p), n }),
                    ]);
                    return { p, first: first.value, second: second.value };
                }),
            );
            if (!this.state.isCurrent('curve', token)) {
                return;
            }
            this.hideBanner();
            this.samples = samples;
            this.redrawChart();
        } catch (err) {
            if (!this.state.isCurrent('curve', token)) {
                return;
            }
            if (err instanceof ServiceUnreachable) {
                this.showBanner(`service unreachable: ${err.message}`);
                this.clearDisplays();
            } else {
                this.chart.clear(err instanceof Error ? err.message : String(err));
            }
        }
    }

    private redrawChart(): void {
        const overlay = observedPairsNear(
            this.body,
            this.state.firstTask,
            this.state.secondTask,
            this.state.n,
        );
        this.chart.render({
            n: this.state.n,
            samples: this.samples,
            current: this.current
                ? { p: this.current.p, first: this.current.first.value, second: this.current.second.value }
                : null,
            observed: overlay.pairs,
            observedN: overlay.observedN,
            pins: this.state.pins,
            axisLabels: [this.state.firstTask, this.state.secondTask],
        });
    }

    pinCurrent(): void {
        if (!this.current || this.current.p !== this.state.p || this.current.n !== this.state.n) {
            return; // nothing fresh to pin
        }
        this.state.pin(this.current.first, this.current.second);
        this.renderPins();
        this.redrawChart();
    }

    renderPins(): void {
        const tbody = this.el('pins-body');
        tbody.innerHTML = '';
        for (const [i, pin] of this.state.pins.entries()) {
            const row = this.doc.createElement('tr');
            row.dataset.pin = String(i);
            const cells: [string, number, number][] = [
                ['p', pin.p, 3],
                ['n', pin.n, 4],
                ['first', pin.first.value, 5],
                ['second', pin.second.value, 5],
            ];
            for (const [name, value, digits] of cells) {
                const td = this.doc.createElement('td');
                td.dataset.field = name;
                setNumber(td, value, digits);
                row.appendChild(td);
            }
            tbody.appendChild(row);
        }
    }
}

declare global {
    interface Window {
        explorer?: ExplorerApp;
    }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined' && document.getElementById('chart')) {
    const app = new ExplorerApp(document, new ApiClient(''));
    window.explorer = app;
    void app.start();
}
