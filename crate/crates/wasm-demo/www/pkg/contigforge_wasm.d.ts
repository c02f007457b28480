/* tslint:disable */
/* eslint-disable */

/**
 * Synthesize a genome, sample error-free reads and assemble them.
 */
export function assemble(genome_len: number, read_len: number, coverage: number, grid: number, seed: number): string;

/**
 * Contigs from reads in FASTA and a string graph in TSV.
 */
export function assemble_graph(reads: string, graph: string, grid: number): string;

/**
 * Greedy LPT placement of contig sizes (comma or space separated).
 */
export function schedule(sizes: string, ranks: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly assemble: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly assemble_graph: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly schedule: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
