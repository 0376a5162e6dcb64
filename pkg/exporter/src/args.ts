/** Tiny --flag value parser shared by the export scripts. */

export interface FlagSpec {
  required?: string[];
  defaults?: Record<string, string>;
}

export function parseFlags(argv: string[], spec: FlagSpec = {}): Record<string, string> {
  const out: Record<string, string> = { ...(spec.defaults ?? {}) };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag --${key} needs a value`);
    }
    out[key] = value;
    i++;
  }
  for (const key of spec.required ?? []) {
    if (!(key in out)) throw new Error(`missing required flag --${key}`);
  }
  return out;
}

export function runCli(body: () => void | Promise<void>): void {
  Promise.resolve()
    .then(body)
    .catch((err) => {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      process.exit(1);
    });
}
