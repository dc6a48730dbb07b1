import { SchemaError } from "./csv";

/** Shared entry point: exit 2 on usage/schema problems, 1 on anything else. */
export function runMain(
  render: (csv: string, out: string) => void,
  name: string,
  args: string[],
): never {
  if (args.length !== 2) {
    console.error(`usage: ${name} <csv> <out.png>`);
    process.exit(2);
  }
  try {
    render(args[0], args[1]);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`${name}: schema mismatch: ${err.message}`);
      process.exit(2);
    }
    console.error(`${name}: ${err instanceof Error ? err.message : String(err)}`);
    process.exit(1);
  }
  process.exit(0);
}
