/**
 * Entry point.
 *
 *   node dist/src/main.js --listen stdio --asr mock:echo \
 *     --classifier mock:fixed:1:0.9 --summarizer mock:lead
 *
 * Flags: --listen stdio|HOST:PORT, --asr REF, --classifier REF,
 * --summarizer REF, --max-in-flight N.  At least one model must be
 * configured; a model that fails to load aborts startup with its name.
 */

import net from "node:net";
import process from "node:process";

import { loadClassifier, loadSummarizer, loadTranscriber, Models } from "./models.js";
import { ModelServer } from "./server.js";

interface Config {
  listen: string;
  asr?: string;
  classifier?: string;
  summarizer?: string;
  maxInFlight: number;
}

function parseArgs(argv: string[]): Config {
  const config: Config = { listen: "stdio", maxInFlight: 4 };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--listen":
        config.listen = requireValue(flag, value);
        i += 1;
        break;
      case "--asr":
        config.asr = requireValue(flag, value);
        i += 1;
        break;
      case "--classifier":
        config.classifier = requireValue(flag, value);
        i += 1;
        break;
      case "--summarizer":
        config.summarizer = requireValue(flag, value);
        i += 1;
        break;
      case "--max-in-flight": {
        const n = Number(requireValue(flag, value));
        if (!Number.isInteger(n) || n < 1) usage(`--max-in-flight must be an integer >= 1, got ${value}`);
        config.maxInFlight = n;
        i += 1;
        break;
      }
      default:
        usage(`unknown flag ${flag}`);
    }
  }
  if (!config.asr && !config.classifier && !config.summarizer) {
    usage("configure at least one model (--asr/--classifier/--summarizer)");
  }
  return config;
}

function requireValue(flag: string, value: string | undefined): string {
  if (value === undefined) usage(`${flag} needs a value`);
  return value;
}

function usage(message: string): never {
  console.error(`model-server: ${message}`);
  console.error(
    "usage: main.js [--listen stdio|HOST:PORT] [--asr REF] [--classifier REF] " +
      "[--summarizer REF] [--max-in-flight N]",
  );
  process.exit(2);
}

async function loadAll(config: Config): Promise<Models> {
  const models: Models = {};
  if (config.asr) models.transcriber = await loadTranscriber(config.asr);
  if (config.classifier) models.classifier = await loadClassifier(config.classifier);
  if (config.summarizer) models.summarizer = await loadSummarizer(config.summarizer);
  return models;
}

async function main(): Promise<void> {
  const config = parseArgs(process.argv.slice(2));
  let models: Models;
  try {
    models = await loadAll(config);
  } catch (err) {
    console.error(`model-server: ${err instanceof Error ? err.message : String(err)}`);
    process.exit(1);
  }
  const server = new ModelServer(models, config.maxInFlight);

  if (config.listen === "stdio") {
    await server.attach(process.stdin, process.stdout);
    return;
  }

  const sep = config.listen.lastIndexOf(":");
  if (sep < 1) usage(`--listen must be stdio or HOST:PORT, got ${config.listen}`);
  const host = config.listen.slice(0, sep);
  const port = Number(config.listen.slice(sep + 1));
  if (!Number.isInteger(port) || port < 0 || port > 65535) {
    usage(`bad port in --listen ${config.listen}`);
  }

  const tcp = net.createServer((conn) => {
    conn.on("error", () => conn.destroy());
    void server.attach(conn, conn);
  });
  tcp.listen(port, host, () => {
    const addr = tcp.address();
    if (addr && typeof addr === "object") {
      console.error(`model-server: listening on ${addr.address}:${addr.port}`);
    }
  });
  tcp.on("error", (err) => {
    console.error(`model-server: listen failed: ${String(err)}`);
    process.exit(1);
  });
}

void main();
