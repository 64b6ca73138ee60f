// Test harness: a faithful in-memory stand-in for the bundle service plus
// the real page DOM. All law math lives HERE (the service side); the
// client under test must only move numbers around.

import { readFileSync } from 'node:fs';
import { resolve } from 'node:path';

import type { BundleDocument, PredictRequest, PredictResponse } from '../src/types.js';

export interface TaskSpec {
    beta1: number;
    alpha: number;
    lInf: number;
    fractionC1: number; // linear fraction curve f(p) = c1 * (p - 1) + 1
}

export const TASKS: Record<string, TaskSpec> = {
    'en-de': { beta1: 100, alpha: 0.3, lInf: 1.0, fractionC1: 0.9 },
    'en-zh': { beta1: 120, alpha: 0.32, lInf: 1.2, fractionC1: 0.8 },
};

export function serviceCompute(req: PredictRequest): PredictResponse {
    const spec = TASKS[req.task];
    if (!spec) {
        throw new Error(`unknown task ${req.task}`);
    }
    const f = spec.fractionC1 * (req.p - 1) + 1;
    return {
        value: spec.beta1 * (f * req.n) ** -spec.alpha + spec.lInf,
        n_eff: f * req.n,
        f,
    };
}

export function bundleDocument(): BundleDocument {
    const tasks: BundleDocument['body']['tasks'] = {};
    for (const [name, spec] of Object.entries(TASKS)) {
        const observations: [number, number, number][] = [];
        for (const n of [2e7, 2e8, 1e9]) {
            for (const p of [0.3, 0.5, 1.0]) {
                observations.push([p, n, serviceCompute({ task: name, p, n }).value]);
            }
            // Complement weights so two-task observed pairs exist.
            observations.push([0.7, n, serviceCompute({ task: name, p: 0.7, n }).value]);
        }
        tasks[name] = {
            joint_law: {
                task: { name, direction: null },
                alpha: spec.alpha,
                l_inf: spec.lInf,
                betas: { '1.0': spec.beta1 },
                metric_direction: 'loss_like',
            },
            single_task: { beta: spec.beta1, alpha: spec.alpha, l_inf: spec.lInf },
            fraction_fits: { linear: { form: 'linear', c1: spec.fractionC1 } },
            effective_fractions: { '1.0': 1.0 },
            observations,
        };
    }
    return {
        schema_version: 1,
        sha256: 'stub',
        body: {
            metric: 'cross_entropy',
            direction: 'loss_like',
            testset: 'in_domain',
            tasks,
            provenance: { dataset_sha256: 'stub', tool_version: 'test' },
        },
    };
}

export interface ServiceStub {
    requests: PredictRequest[];
    failNetwork: boolean;
    missingTasks: Set<string>;
}

/** Install a fetch stub that behaves like the real service. */
export function installService(): ServiceStub {
    const stub: ServiceStub = { requests: [], failNetwork: false, missingTasks: new Set() };
    globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
        if (stub.failNetwork) {
            throw new TypeError('fetch failed: connection refused');
        }
        const url = String(input);
        if (url.endsWith('/api/bundle')) {
            return jsonResponse(200, bundleDocument());
        }
        if (url.includes('/api/predict')) {
            const req = JSON.parse(String(init?.body ?? '{}')) as PredictRequest;
            stub.requests.push(req);
            if (stub.missingTasks.has(req.task)) {
                return jsonResponse(404, {
                    code: 'missing_task',
                    message: `task '${req.task}' has no fraction fit`,
                });
            }
            if (req.p === 0) {
                return jsonResponse(400, { code: 'zero_shot', message: 'zero-shot unsupported' });
            }
            return jsonResponse(200, serviceCompute(req));
        }
        return jsonResponse(404, { code: 'not_found', message: url });
    }) as typeof fetch;
    return stub;
}

function jsonResponse(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

/** Mount the real page markup (index.html body) into jsdom. */
export function mountPage(): void {
    const html = readFileSync(resolve(process.cwd(), 'index.html'), 'utf-8');
    const body = /<body>([\s\S]*)<\/body>/.exec(html)![1].replace(/<script[\s\S]*?<\/script>/, '');
    document.body.innerHTML = body;
}

export function rawOf(id: string): number {
    const el = document.getElementById(id);
    if (!el || el.dataset.raw === undefined) {
        throw new Error(`element #${id} has no raw value`);
    }
    return Number(el.dataset.raw);
}

export function fieldRaw(selector: string): number {
    const el = document.querySelector(selector) as HTMLElement | null;
    if (!el || el.dataset.raw === undefined) {
        throw new Error(`element ${selector} has no raw value`);
    }
    return Number(el.dataset.raw);
}
