/* tslint:disable */
/* eslint-disable */

/**
 * Descriptors of a phantom fillet with the given dense-core radius (pixels),
 * striation strength (0..1) and striation angle (degrees).
 */
export function describe_phantom(core_radius: number, striation: number, angle_deg: number): string;

/**
 * Weighted F1 of the two-model fusion as the boosted-model weight sweeps 0..1.
 */
export function fusion_landscape(n_per_class: number, separation: number, seed: number): string;

/**
 * Two-component LDA projection of a synthetic three-class table.
 */
export function lda_scatter(n_per_class: number, separation: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly describe_phantom: (a: number, b: number, c: number) => [number, number, number, number];
    readonly fusion_landscape: (a: number, b: number, c: number) => [number, number, number, number];
    readonly lda_scatter: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
