/** Typed client for the prediction/annotation service. */

export type Role = "teacher" | "student";

export interface ContextItem {
  speaker_id: string;
  role: Role;
  text: string;
  talk_move?: string;
}

export interface EchoElement {
  s: number;
  talk_move: string;
  n_tokens: number;
}

export interface PredictResponse {
  probs: number[];
  label: string;
  model_version: string;
  truncated: boolean;
  echo: EchoElement[];
}

export interface DiagnosticContextItem {
  speaker_id: string;
  role: Role;
  text: string;
  talk_move: string;
}

export interface DiagnosticExample {
  example_id: string;
  context: DiagnosticContextItem[];
}

export interface Progress {
  done: number;
  total: number;
}

export interface NextResponse {
  done: boolean;
  example?: DiagnosticExample;
  progress: Progress;
}

export interface AnnotationPayload {
  annotator_id: string;
  example_id: string;
  primary: string;
  acceptable: string[];
}

export interface Meta {
  labels: string[];
  w: number | null;
  model_version: string;
  annotators: string[];
  diagnostic_size: number | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = (await resp.json()) as T & { error?: string };
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? `HTTP ${resp.status}`);
  }
  return body;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    return asJson<T>(await fetch(this.base + path));
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return asJson<T>(resp);
  }

  meta(): Promise<Meta> {
    return this.get("/meta");
  }

  predict(context: ContextItem[]): Promise<PredictResponse> {
    return this.post("/predict", { context });
  }

  diagnosticNext(annotator: string): Promise<NextResponse> {
    return this.get(`/diagnostic/next?annotator=${encodeURIComponent(annotator)}`);
  }

  submitAnnotation(payload: AnnotationPayload): Promise<{ ok: boolean; progress: Progress }> {
    return this.post("/annotations", payload);
  }

  report(): Promise<Record<string, unknown>> {
    return this.get("/report");
  }
}
