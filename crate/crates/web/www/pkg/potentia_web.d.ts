/* tslint:disable */
/* eslint-disable */

/**
 * Sweeps the Riesz measure of `log|p|` out of the ball `B(c, r)`. `roots`
 * holds `x0, y0, x1, y1, ...`.
 */
export function balayage_sweep(roots: Float64Array, cx: number, cy: number, r: number, cells: number): string;

/**
 * Green's function of the unit disk with pole `(px, py)`, row by row, with
 * `null` outside the disk and at the pole.
 */
export function green_field(cells: number, px: number, py: number): string;

/**
 * Uniqueness verdict on the unit disk with hole `|z| <= hole`, bounded
 * growth and the Green test function. `zeros` is a zero specification in
 * JSON, for example `{"kind": "one-minus-inv-k2"}`.
 */
export function zero_sum_verdict(zeros: string, hole: number, cells: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly balayage_sweep: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly green_field: (a: number, b: number, c: number) => [number, number];
    readonly zero_sum_verdict: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
