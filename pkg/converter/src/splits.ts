/** Deterministic node splits with the public benchmark counts:
 * 20 labeled nodes per class for training, 500 validation, 1000 test.
 * The shuffle is seeded from the dataset name, so output is byte-stable.
 */

import { fnv1a, mulberry32, shuffle } from "./prng";

export interface NodeSplits {
  seed: number;
  train: number[];
  val: number[];
  test: number[];
}

export function makeNodeSplits(
  labels: number[],
  datasetName: string,
  trainPerClass = 20,
  numVal = 500,
  numTest = 1000
): NodeSplits {
  const seed = fnv1a(`splits:${datasetName}`);
  const rand = mulberry32(seed);
  const order = shuffle([...labels.keys()], rand);
  const numClasses = Math.max(...labels) + 1;
  const perClass = new Array(numClasses).fill(0);
  const train: number[] = [];
  const rest: number[] = [];
  for (const v of order) {
    if (perClass[labels[v]] < trainPerClass) {
      perClass[labels[v]]++;
      train.push(v);
    } else {
      rest.push(v);
    }
  }
  if (numVal + numTest > rest.length) {
    const frac = numVal / Math.max(1, numVal + numTest);
    numVal = Math.floor(rest.length * frac);
    numTest = rest.length - numVal;
  }
  const asc = (a: number, b: number) => a - b;
  return {
    seed,
    train: train.sort(asc),
    val: rest.slice(0, numVal).sort(asc),
    test: rest.slice(numVal, numVal + numTest).sort(asc),
  };
}
