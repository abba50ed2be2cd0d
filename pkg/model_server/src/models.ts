/**
 * Model adapters behind the three protocol ops.
 *
 * Refs select the implementation:
 *   mock:echo               transcriber answering "chunk-<index>"
 *   mock:fixed:<label>:<p>  classifier answering a constant label/prob
 *   mock:lead[:k]           summarizer keeping the first k sentences (default 3)
 *   xenova:<model-id>       real checkpoint via @xenova/transformers (optional
 *                           dependency; greedy decoding so outputs are stable)
 *
 * Text is never normalized here: all cleaning lives in the core pipeline so
 * there is exactly one normalization implementation.
 */

export interface Transcriber {
  transcribe(samples: Float32Array, chunkIndex: number): Promise<string>;
}

export interface Classifier {
  classify(text: string): Promise<{ label: 0 | 1; prob: number }>;
}

export interface Summarizer {
  summarize(text: string): Promise<string>;
}

export interface Models {
  transcriber?: Transcriber;
  classifier?: Classifier;
  summarizer?: Summarizer;
}

const SENTENCE_ENDS = new Set([".", "।", "\n"]);

/** First-k-sentences extractive summary; mirrors the core pipeline's rule. */
export function leadSummary(text: string, maxSentences: number): string {
  let seen = 0;
  let hasContent = false;
  let i = 0;
  const n = text.length;
  while (i < n) {
    const ch = text[i];
    if (SENTENCE_ENDS.has(ch)) {
      let end = i + 1;
      while (end < n && SENTENCE_ENDS.has(text[end])) end += 1;
      if (hasContent) {
        seen += 1;
        hasContent = false;
        if (seen >= maxSentences) return text.slice(0, end).trim();
      }
      i = end;
    } else {
      if (!/\s/u.test(ch)) hasContent = true;
      i += 1;
    }
  }
  return text.trim();
}

class EchoTranscriber implements Transcriber {
  async transcribe(_samples: Float32Array, chunkIndex: number): Promise<string> {
    return `chunk-${chunkIndex}`;
  }
}

class FixedClassifier implements Classifier {
  constructor(private label: 0 | 1, private prob: number) {}

  async classify(_text: string): Promise<{ label: 0 | 1; prob: number }> {
    return { label: this.label, prob: this.prob };
  }
}

class LeadSummarizer implements Summarizer {
  constructor(private maxSentences: number) {}

  async summarize(text: string): Promise<string> {
    return leadSummary(text, this.maxSentences);
  }
}

// optional dependency: only needed when real checkpoints are configured,
// hence the indirect specifier (kept out of the compile-time module graph)
const TRANSFORMERS_MODULE = "@xenova/transformers";

async function loadTransformers(kind: string, ref: string): Promise<unknown> {
  try {
    return await import(TRANSFORMERS_MODULE);
  } catch (err) {
    throw new Error(
      `cannot load ${kind} model '${ref}': ${TRANSFORMERS_MODULE} is not installed (${String(err)})`,
    );
  }
}

async function xenovaTranscriber(modelId: string, ref: string): Promise<Transcriber> {
  const tf = (await loadTransformers("asr", ref)) as {
    pipeline: (task: string, model: string) => Promise<(x: unknown, opts?: unknown) => Promise<{ text: string }>>;
  };
  const pipe = await tf.pipeline("automatic-speech-recognition", modelId);
  return {
    async transcribe(samples: Float32Array): Promise<string> {
      const out = await pipe(samples, { do_sample: false });
      return out.text ?? "";
    },
  };
}

async function xenovaClassifier(modelId: string, ref: string): Promise<Classifier> {
  const tf = (await loadTransformers("classifier", ref)) as {
    pipeline: (task: string, model: string) => Promise<(x: string) => Promise<Array<{ label: string; score: number }>>>;
  };
  const pipe = await tf.pipeline("text-classification", modelId);
  return {
    async classify(text: string) {
      const [top] = await pipe(text);
      const hateful = /hate|toxic|1/i.test(top.label);
      const prob = hateful ? top.score : 1 - top.score;
      return { label: hateful ? 1 : 0, prob: Math.min(1, Math.max(0, prob)) };
    },
  };
}

async function xenovaSummarizer(modelId: string, ref: string): Promise<Summarizer> {
  const tf = (await loadTransformers("summarizer", ref)) as {
    pipeline: (task: string, model: string) => Promise<(x: string, opts?: unknown) => Promise<Array<{ summary_text: string }>>>;
  };
  const pipe = await tf.pipeline("summarization", modelId);
  return {
    async summarize(text: string) {
      const [out] = await pipe(text, { do_sample: false });
      return out.summary_text ?? "";
    },
  };
}

function badRef(kind: string, ref: string): never {
  throw new Error(`cannot load ${kind} model '${ref}': unknown model ref (use mock:... or xenova:...)`);
}

export async function loadTranscriber(ref: string): Promise<Transcriber> {
  if (ref === "mock:echo") return new EchoTranscriber();
  if (ref.startsWith("xenova:")) return xenovaTranscriber(ref.slice("xenova:".length), ref);
  badRef("asr", ref);
}

export async function loadClassifier(ref: string): Promise<Classifier> {
  if (ref.startsWith("mock:fixed:")) {
    const parts = ref.split(":");
    const label = Number(parts[2]);
    const prob = Number(parts[3]);
    if ((label !== 0 && label !== 1) || !(prob >= 0 && prob <= 1)) {
      throw new Error(`cannot load classifier model '${ref}': expected mock:fixed:<0|1>:<prob in [0,1]>`);
    }
    return new FixedClassifier(label as 0 | 1, prob);
  }
  if (ref.startsWith("xenova:")) return xenovaClassifier(ref.slice("xenova:".length), ref);
  badRef("classifier", ref);
}

export async function loadSummarizer(ref: string): Promise<Summarizer> {
  if (ref === "mock:lead" || ref.startsWith("mock:lead:")) {
    const k = ref === "mock:lead" ? 3 : Number(ref.split(":")[2]);
    if (!Number.isInteger(k) || k < 1) {
      throw new Error(`cannot load summarizer model '${ref}': expected mock:lead[:k>=1]`);
    }
    return new LeadSummarizer(k);
  }
  if (ref.startsWith("xenova:")) return xenovaSummarizer(ref.slice("xenova:".length), ref);
  badRef("summarizer", ref);
}
