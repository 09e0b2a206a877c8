import {
  AnnotationPayload,
  ApiClient,
  ApiError,
  ContextItem,
  NextResponse,
  PredictResponse,
} from "../src/api.js";
import { LabelSet } from "../src/labels.js";

export const LABELS = [
  "None",
  "Wait",
  "Press for Accuracy",
  "Keeping Everyone Together",
  "Revoicing",
  "Getting Students to Relate",
  "Restating",
  "Press for Reasoning",
];

export function labelSet(): LabelSet {
  return new LabelSet([...LABELS]);
}

export function fakePrediction(topIndex = 0): PredictResponse {
  const probs = new Array(8).fill(0.05);
  probs[topIndex] = 1 - 0.05 * 7;
  return {
    probs,
    label: LABELS[topIndex]!,
    model_version: "test/v1/0",
    truncated: false,
    echo: [],
  };
}

/** In-memory stand-in for the service, with scriptable failures. */
export class FakeApi {
  predictCalls: ContextItem[][] = [];
  submitted: AnnotationPayload[] = [];
  failNextSubmits = 0; // network-style failures
  duplicateIds = new Set<string>();
  examples: { example_id: string }[];
  private cursor = 0;

  constructor(nExamples = 3) {
    this.examples = Array.from({ length: nExamples }, (_, i) => ({ example_id: `d:${i}` }));
  }

  asClient(): ApiClient {
    return this as unknown as ApiClient;
  }

  async predict(context: ContextItem[]): Promise<PredictResponse> {
    this.predictCalls.push(context);
    return fakePrediction(context.length % 8);
  }

  async diagnosticNext(_annotator: string): Promise<NextResponse> {
    const total = this.examples.length;
    if (this.cursor >= total) {
      return { done: true, progress: { done: total, total } };
    }
    return {
      done: false,
      example: {
        example_id: this.examples[this.cursor]!.example_id,
        context: [
          { speaker_id: "t", role: "teacher", text: "what is it", talk_move: "Press for Accuracy" },
        ],
      },
      progress: { done: this.cursor, total },
    };
  }

  async submitAnnotation(payload: AnnotationPayload) {
    if (this.failNextSubmits > 0) {
      this.failNextSubmits -= 1;
      throw new TypeError("fetch failed"); // what fetch throws on network loss
    }
    if (this.duplicateIds.has(payload.example_id)) {
      throw new ApiError(409, "already recorded");
    }
    this.submitted.push(payload);
    this.cursor += 1;
    return { ok: true, progress: { done: this.cursor, total: this.examples.length } };
  }
}
