// Display formatting. Every element showing a service number also carries
// the raw value in data-raw (String(x) round-trips exactly), so displayed
// values stay traceable to the exact response that produced them.

export function fmt(x: number, digits = 5): string {
    if (!Number.isFinite(x)) {
        return String(x);
    }
    return Number(x.toPrecision(digits)).toString();
}

export function fmtSize(n: number): string {
    if (n >= 1e9) return `${fmt(n / 1e9, 3)}B`;
    if (n >= 1e6) return `${fmt(n / 1e6, 3)}M`;
    if (n >= 1e3) return `${fmt(n / 1e3, 3)}K`;
    return fmt(n, 3);
}

/** Render a service number into an element: formatted text, exact raw value. */
export function setNumber(el: HTMLElement, raw: number, digits = 5): void {
    el.textContent = fmt(raw, digits);
    el.dataset.raw = String(raw);
}

export function clearNumber(el: HTMLElement, placeholder = '—'): void {
    el.textContent = placeholder;
    delete el.dataset.raw;
}
