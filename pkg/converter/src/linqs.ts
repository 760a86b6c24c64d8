/** Parsers for the upstream citation-network text distributions.
 *
 * Cora/Citeseer ship as `<name>.content` (one node per line:
 * id <TAB> w0..w_{F-1} <TAB> class) and `<name>.cites` (cited <TAB> citing).
 * PubMed ships as two .tab files with a feature vocabulary in the header and
 * sparse word=value attributes per node.
 */

import * as fs from "fs";
import * as path from "path";

export class ConvertError extends Error {}

export interface RawBundle {
  /** node ids in first-appearance order */
  ids: string[];
  /** row-major [numNodes x featureDim] */
  features: Float32Array;
  featureDim: number;
  /** class name per node */
  classNames: string[];
  /** raw directed citation pairs (by node id string) */
  cites: Array<[string, string]>;
}

export interface CleanStats {
  rawCites: number;
  dangling: number;
  selfLoops: number;
  duplicates: number;
  edges: number;
}

function findFile(inputDir: string, candidates: string[]): string {
  for (const rel of candidates) {
    const p = path.join(inputDir, rel);
    if (fs.existsSync(p)) return p;
  }
  throw new ConvertError(
    `missing input file: looked for ${candidates.join(", ")} under ${inputDir}`
  );
}

function readLines(file: string): string[] {
  return fs.readFileSync(file, "utf8").split(/\r?\n/);
}

export function parseContentCites(inputDir: string, name: string): RawBundle {
  const contentFile = findFile(inputDir, [
    `${name}.content`,
    path.join(name, `${name}.content`),
  ]);
  const citesFile = findFile(inputDir, [
    `${name}.cites`,
    path.join(name, `${name}.cites`),
  ]);

  const ids: string[] = [];
  const classNames: string[] = [];
  const rows: number[][] = [];
  let featureDim = -1;
  const seen = new Set<string>();
  readLines(contentFile).forEach((line, idx) => {
    if (!line.trim()) return;
    const parts = line.split("\t");
    if (parts.length < 3) {
      throw new ConvertError(`${contentFile}:${idx + 1}: expected id, features, class`);
    }
    const id = parts[0];
    if (seen.has(id)) {
      throw new ConvertError(`${contentFile}:${idx + 1}: duplicate node id ${id}`);
    }
    seen.add(id);
    const cls = parts[parts.length - 1];
    const feats = parts.slice(1, -1).map((v, j) => {
      const x = Number(v);
      if (!Number.isFinite(x)) {
        throw new ConvertError(
          `${contentFile}:${idx + 1}: bad feature value ${v} at column ${j + 1}`
        );
      }
      return x;
    });
    if (featureDim < 0) featureDim = feats.length;
    else if (feats.length !== featureDim) {
      throw new ConvertError(
        `${contentFile}:${idx + 1}: expected ${featureDim} features, got ${feats.length}`
      );
    }
    ids.push(id);
    classNames.push(cls);
    rows.push(feats);
  });
  if (!ids.length) throw new ConvertError(`${contentFile}: no nodes`);

  const features = new Float32Array(ids.length * featureDim);
  rows.forEach((row, i) => features.set(row, i * featureDim));

  const cites: Array<[string, string]> = [];
  readLines(citesFile).forEach((line, idx) => {
    if (!line.trim()) return;
    const parts = line.split(/\s+/).filter(Boolean);
    if (parts.length !== 2) {
      throw new ConvertError(`${citesFile}:${idx + 1}: expected two ids`);
    }
    cites.push([parts[0], parts[1]]);
  });
  return { ids, features, featureDim, classNames, cites };
}

export function parsePubmed(inputDir: string): RawBundle {
  const nodeFile = findFile(inputDir, [
    "Pubmed-Diabetes.NODE.paper.tab",
    path.join("data", "Pubmed-Diabetes.NODE.paper.tab"),
    path.join("Pubmed-Diabetes", "data", "Pubmed-Diabetes.NODE.paper.tab"),
  ]);
  const citesFile = findFile(inputDir, [
    "Pubmed-Diabetes.DIRECTED.cites.tab",
    path.join("data", "Pubmed-Diabetes.DIRECTED.cites.tab"),
    path.join("Pubmed-Diabetes", "data", "Pubmed-Diabetes.DIRECTED.cites.tab"),
  ]);

  const nodeLines = readLines(nodeFile);
  if (nodeLines.length < 3) throw new ConvertError(`${nodeFile}: truncated header`);
  // header line 2 declares the vocabulary: "cat=... numeric:w_foo:0.0 ..."
  const vocab: string[] = [];
  for (const tok of nodeLines[1].split("\t")) {
    const m = tok.match(/^numeric:([^:]+):/);
    if (m) vocab.push(m[1]);
  }
  if (!vocab.length) {
    throw new ConvertError(`${nodeFile}:2: no feature vocabulary found`);
  }
  const wordIndex = new Map(vocab.map((w, i) => [w, i] as const));

  const ids: string[] = [];
  const classNames: string[] = [];
  const rows: Array<Map<number, number>> = [];
  const seen = new Set<string>();
  nodeLines.slice(2).forEach((line, idx) => {
    if (!line.trim()) return;
    const parts = line.split("\t");
    const id = parts[0];
    if (seen.has(id)) {
      throw new ConvertError(`${nodeFile}:${idx + 3}: duplicate node id ${id}`);
    }
    seen.add(id);
    let cls: string | null = null;
    const row = new Map<number, number>();
    for (const tok of parts.slice(1)) {
      if (tok.startsWith("label=")) cls = tok.slice("label=".length);
      else if (tok.startsWith("summary=")) continue;
      else if (tok.includes("=")) {
        const [word, value] = tok.split("=");
        const col = wordIndex.get(word);
        if (col === undefined) {
          throw new ConvertError(`${nodeFile}:${idx + 3}: unknown word ${word}`);
        }
        const x = Number(value);
        if (!Number.isFinite(x)) {
          throw new ConvertError(`${nodeFile}:${idx + 3}: bad value for ${word}`);
        }
        row.set(col, x);
      }
    }
    if (cls === null) {
      throw new ConvertError(`${nodeFile}:${idx + 3}: node ${id} has no label`);
    }
    ids.push(id);
    classNames.push(cls);
    rows.push(row);
  });

  const features = new Float32Array(ids.length * vocab.length);
  rows.forEach((row, i) => {
    for (const [col, value] of row) features[i * vocab.length + col] = value;
  });

  const cites: Array<[string, string]> = [];
  readLines(citesFile).slice(2).forEach((line, idx) => {
    if (!line.trim()) return;
    const refs = [...line.matchAll(/paper:(\S+)/g)].map((m) => m[1]);
    if (refs.length !== 2) {
      throw new ConvertError(`${citesFile}:${idx + 3}: expected two paper refs`);
    }
    cites.push([refs[0], refs[1]]);
  });
  return { ids, features, featureDim: vocab.length, classNames, cites };
}

/** Symmetrize and dedup citations; drop self-loops and ids missing from the
 * node table. Returns sorted undirected (i, j) pairs with i < j. */
export function cleanEdges(
  bundle: RawBundle
): { edges: Array<[number, number]>; stats: CleanStats } {
  const index = new Map(bundle.ids.map((id, i) => [id, i] as const));
  const keys = new Set<number>();
  const edges: Array<[number, number]> = [];
  const n = bundle.ids.length;
  let dangling = 0;
  let selfLoops = 0;
  let duplicates = 0;
  for (const [a, b] of bundle.cites) {
    const u = index.get(a);
    const v = index.get(b);
    if (u === undefined || v === undefined) {
      dangling++;
      continue;
    }
    if (u === v) {
      selfLoops++;
      continue;
    }
    const [lo, hi] = u < v ? [u, v] : [v, u];
    const key = lo * n + hi;
    if (keys.has(key)) {
      duplicates++;
      continue;
    }
    keys.add(key);
    edges.push([lo, hi]);
  }
  edges.sort((e, f) => (e[0] - f[0]) || (e[1] - f[1]));
  return {
    edges,
    stats: {
      rawCites: bundle.cites.length,
      dangling,
      selfLoops,
      duplicates,
      edges: edges.length,
    },
  };
}
