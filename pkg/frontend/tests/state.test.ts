import { describe, expect, it } from 'vitest';

import {
    complementOf,
    ExplorerState,
    observedSizeRange,
    quantizeP,
    SizeAxis,
} from '../src/state.js';
import { bundleDocument } from './helpers.js';

describe('weight quantization', () => {
    it('rounds to 0.01 steps', () => {
        expect(quantizeP(0.5004)).toBe(0.5);
        expect(quantizeP(0.437)).toBe(0.44);
        expect(quantizeP(0.123456)).toBe(0.12);
    });

    it('clamps to the slider range', () => {
        expect(quantizeP(0.0)).toBe(0.05);
        expect(quantizeP(1.0)).toBe(0.95);
    });

    it('complement stays a clean two-decimal weight', () => {
        expect(complementOf(0.37)).toBe(0.63);
        expect(complementOf(0.57)).toBe(0.43);
        expect(complementOf(0.95)).toBe(0.05);
    });
});

describe('size axis', () => {
    it('extends the observed range 10x in 1% log steps', () => {
        const axis = new SizeAxis(2e7, 1e9);
        expect(axis.sizeAt(0)).toBe(2e7);
        const top = axis.sizeAt(axis.maxIndex);
        expect(top).toBeGreaterThan(0.99e10);
        expect(top).toBeLessThan(1.01e10);
        // Neighboring steps differ by exactly 1%.
        expect(axis.sizeAt(51) / axis.sizeAt(50)).toBeCloseTo(1.01, 12);
    });

    it('clamps indices', () => {
        const axis = new SizeAxis(1e7, 1e8);
        expect(axis.sizeAt(-5)).toBe(1e7);
        expect(axis.sizeAt(axis.maxIndex + 99)).toBe(axis.sizeAt(axis.maxIndex));
    });

    it('derives the range from bundle observations', () => {
        const [lo, hi] = observedSizeRange(bundleDocument().body);
        expect(lo).toBe(2e7);
        expect(hi).toBe(1e9);
    });
});

describe('explorer state', () => {
    const axis = new SizeAxis(2e7, 1e9);

    it('needs two tasks', () => {
        expect(() => new ExplorerState(axis, ['solo'])).toThrow();
    });

    it('pins are frozen snapshots', () => {
        const state = new ExplorerState(axis, ['a', 'b']);
        state.setP(0.4);
        const pin = state.pin(
            { value: 1.5, n_eff: 4e8, f: 0.4 },
            { value: 1.8, n_eff: 5e8, f: 0.6 },
        );
        expect(Object.isFrozen(pin)).toBe(true);
        expect(Object.isFrozen(pin.first)).toBe(true);
        expect(() => {
            (pin.first as { value: number }).value = 99;
        }).toThrow();
        state.setP(0.9);
        expect(state.pins[0].p).toBe(0.4);
    });

    it('request tokens implement last-write-wins', () => {
        const state = new ExplorerState(axis, ['a', 'b']);
        const stale = state.nextToken('current');
        const fresh = state.nextToken('current');
        expect(state.isCurrent('current', stale)).toBe(false);
        expect(state.isCurrent('current', fresh)).toBe(true);
    });
});
