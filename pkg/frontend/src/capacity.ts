import { clearNumber, setNumber } from './format.js';
import type { PredictResponse } from './types.js';

/**
 * Effective-capacity readout for the selected task at the current (p, n):
 * the fraction f(p), the effective parameter count, and the relative gain
 * f/p. f and n_eff come straight from the service; the gain is the
 * displayed ratio of the response's f to the widget's p.
 */
export class CapacityPanel {
    private readonly fEl: HTMLElement;
    private readonly nEffEl: HTMLElement;
    private readonly gainEl: HTMLElement;
    private readonly noteEl: HTMLElement;

    constructor(root: HTMLElement) {
        this.fEl = root.querySelector('[data-field="f"]') as HTMLElement;
        this.nEffEl = root.querySelector('[data-field="n_eff"]') as HTMLElement;
        this.gainEl = root.querySelector('[data-field="gain"]') as HTMLElement;
        this.noteEl = root.querySelector('[data-field="note"]') as HTMLElement;
    }

    render(response: PredictResponse, p: number): void {
        setNumber(this.fEl, response.f);
        setNumber(this.nEffEl, response.n_eff);
        setNumber(this.gainEl, response.f / p, 4);
        this.noteEl.textContent = '';
    }

    disable(reason: string): void {
        clearNumber(this.fEl);
        clearNumber(this.nEffEl);
        clearNumber(this.gainEl);
        this.noteEl.textContent = `capacity readout unavailable: ${reason}`;
    }
}
