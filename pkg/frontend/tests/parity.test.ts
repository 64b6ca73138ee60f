// B1 -- zero-math client: every number the UI shows equals the service's
// /api/predict response for the same (task, p, n), bit for bit.

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { complementOf } from '../src/state.js';
import { ExplorerApp } from '../src/main.js';
import {
    fieldRaw,
    installService,
    mountPage,
    rawOf,
    serviceCompute,
    type ServiceStub,
} from './helpers.js';

let stub: ServiceStub;
let app: ExplorerApp;

beforeEach(async () => {
    stub = installService();
    mountPage();
    app = new ExplorerApp(document, new ApiClient(''));
    await app.start();
});

describe('B1: UI/service parity', () => {
    it('20 sampled (p, n) pairs display exactly the service responses', async () => {
        // Deterministic sample of 20 slider positions.
        const samples: [number, number][] = [];
        for (let i = 0; i < 20; i++) {
            const p = Number((0.05 + 0.045 * i).toFixed(2));
            const sizeIndex = 7 * i + 3;
            samples.push([p, sizeIndex]);
        }
        for (const [p, sizeIndex] of samples) {
            app.state.setP(p);
            app.state.setSizeIndex(sizeIndex);
            await app.refreshCurrent();

            const n = app.state.n;
            const expectedFirst = serviceCompute({ task: 'en-de', p, n });
            const expectedSecond = serviceCompute({ task: 'en-zh', p: complementOf(p), n });

            expect(Object.is(rawOf('value-first'), expectedFirst.value)).toBe(true);
            expect(Object.is(rawOf('value-second'), expectedSecond.value)).toBe(true);
            expect(Object.is(fieldRaw('#capacity [data-field="f"]'), expectedFirst.f)).toBe(true);
            expect(Object.is(fieldRaw('#capacity [data-field="n_eff"]'), expectedFirst.n_eff)).toBe(
                true,
            );
        }
    });

    it('capacity gain is the displayed ratio of the response f to the widget p', async () => {
        app.state.setP(0.25);
        await app.refreshCurrent();
        const f = serviceCompute({ task: 'en-de', p: 0.25, n: app.state.n }).f;
        expect(fieldRaw('#capacity [data-field="gain"]')).toBe(f / 0.25);
    });

    it('replaying a session against the same bundle shows identical values', async () => {
        const script: [number, number][] = [
            [0.2, 10],
            [0.75, 200],
            [0.4, 450],
        ];
        const runs: number[][] = [];
        for (let replay = 0; replay < 2; replay++) {
            const seen: number[] = [];
            for (const [p, k] of script) {
                app.state.setP(p);
                app.state.setSizeIndex(k);
                await app.refreshCurrent();
                seen.push(rawOf('value-first'), rawOf('value-second'));
            }
            runs.push(seen);
        }
        expect(runs[0]).toEqual(runs[1]);
    });

    it('every chart sample comes from a recorded service request', async () => {
        stub.requests.length = 0;
        await app.refreshCurve();
        // 19 grid weights x 2 tasks.
        expect(stub.requests.length).toBe(38);
        const firstTaskWeights = stub.requests
            .filter((r) => r.task === 'en-de')
            .map((r) => r.p);
        expect(firstTaskWeights).toContain(0.05);
        expect(firstTaskWeights).toContain(0.95);
    });

    it('missing fraction fit disables the capacity readout with an explanation', async () => {
        stub.missingTasks.add('en-de');
        await app.refreshCurrent();
        const note = document.querySelector('#capacity [data-field="note"]')!;
        expect(note.textContent).toContain('no fraction fit');
        expect(document.getElementById('value-first')!.dataset.raw).toBeUndefined();
    });
});
