// Regenerate the golden input recording after deliberate rig changes:
//   npx vite-node scripts/gen_golden.ts

import { mkdirSync, writeFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { runScriptedSequence } from '../tests/scripted_sequence';

const out = join(dirname(fileURLToPath(import.meta.url)), '..', 'tests', 'golden', 'input_stream.json');
mkdirSync(dirname(out), { recursive: true });
writeFileSync(out, JSON.stringify(runScriptedSequence(), null, 2) + '\n');
console.log(`wrote ${out}`);
