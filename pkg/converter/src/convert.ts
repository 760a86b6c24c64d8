#!/usr/bin/env node
/** One-shot converter from the upstream citation-network distributions to
 * the portable dataset format.
 *
 * Usage: convert <input_dir> <cora|citeseer|pubmed> <output_dir>
 */

import { cleanEdges, ConvertError, parseContentCites, parsePubmed, RawBundle } from "./linqs";
import { writePortable } from "./portable";
import { makeNodeSplits } from "./splits";

export function convert(inputDir: string, name: string, outputDir: string): void {
  let bundle: RawBundle;
  if (name === "cora" || name === "citeseer") {
    bundle = parseContentCites(inputDir, name);
  } else if (name === "pubmed") {
    bundle = parsePubmed(inputDir);
  } else {
    throw new ConvertError(`unknown dataset ${name} (expected cora|citeseer|pubmed)`);
  }

  // class names -> indices, sorted for stability
  const classList = [...new Set(bundle.classNames)].sort();
  const classIndex = new Map(classList.map((c, i) => [c, i] as const));
  const labels = bundle.classNames.map((c) => classIndex.get(c)!);

  const { edges, stats } = cleanEdges(bundle);
  console.log(
    `${name}: ${bundle.ids.length} nodes, ${bundle.featureDim} features, ` +
      `${classList.length} classes`
  );
  console.log(
    `citations: ${stats.rawCites} raw -> ${stats.edges} undirected edges ` +
      `(dropped ${stats.duplicates} duplicates, ${stats.selfLoops} self-loops, ` +
      `${stats.dangling} with unknown ids)`
  );

  const splits = makeNodeSplits(labels, name);
  writePortable(
    {
      name,
      numNodes: bundle.ids.length,
      featureDim: bundle.featureDim,
      numClasses: classList.length,
      features: bundle.features,
      edges,
      labels,
      splits,
    },
    outputDir
  );
  console.log(`wrote portable dataset to ${outputDir}`);
}

function main(argv: string[]): number {
  if (argv.length !== 3) {
    console.error("usage: convert <input_dir> <cora|citeseer|pubmed> <output_dir>");
    return 1;
  }
  try {
    convert(argv[0], argv[1], argv[2]);
    return 0;
  } catch (err) {
    if (err instanceof ConvertError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
