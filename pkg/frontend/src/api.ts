/** Client for the screening service.
 *
 * The app talks to exactly two routes: POST /api/v1/predict and
 * GET /api/v1/health. The base URL is configurable; nothing else about
 * the service is assumed.
 */

export interface ClassProbs {
  healthy: number;
  parkinson: number;
}

export interface PredictResponse {
  label: string;
  confidence: number;
  winning_source: string;
  per_model: Partial<Record<"spiral" | "wave", ClassProbs>>;
  model_versions: Record<string, string>;
}

export interface HealthResponse {
  status: string;
  models: Record<string, string>;
}

export interface ServiceError {
  code: string;
  message: string;
}

export type PredictOutcome =
  | { ok: true; verdict: PredictResponse }
  | { ok: false; retryable: boolean; error: ServiceError };

export interface PredictImages {
  spiral?: Uint8Array | Blob;
  wave?: Uint8Array | Blob;
}

type FetchLike = typeof fetch;

function asBlob(data: Uint8Array | Blob): Blob {
  if (data instanceof Blob) return data;
  // copy into a fresh ArrayBuffer so SharedArrayBuffer-backed views
  // and offset views both satisfy the BlobPart type
  const copy = new Uint8Array(data);
  return new Blob([copy.buffer], { type: "image/png" });
}

export async function predict(
  baseUrl: string,
  images: PredictImages,
  fetchFn: FetchLike = fetch,
): Promise<PredictOutcome> {
  const form = new FormData();
  if (images.spiral) form.append("spiral", asBlob(images.spiral), "spiral.png");
  if (images.wave) form.append("wave", asBlob(images.wave), "wave.png");

  let resp: Response;
  try {
    resp = await fetchFn(`${baseUrl}/api/v1/predict`, {
      method: "POST",
      body: form,
    });
  } catch (err) {
    return {
      ok: false,
      retryable: true,
      error: {
        code: "network_error",
        message: err instanceof Error ? err.message : String(err),
      },
    };
  }

  if (!resp.ok) {
    let error: ServiceError = {
      code: `http_${resp.status}`,
      message: resp.statusText,
    };
    try {
      const body = await resp.json();
      if (body && body.error) error = body.error as ServiceError;
    } catch {
      // keep the status-line fallback
    }
    return { ok: false, retryable: resp.status >= 500, error };
  }

  return { ok: true, verdict: (await resp.json()) as PredictResponse };
}

export async function health(
  baseUrl: string,
  fetchFn: FetchLike = fetch,
): Promise<HealthResponse> {
  const resp = await fetchFn(`${baseUrl}/api/v1/health`);
  if (!resp.ok) {
    throw new Error(`health check failed: HTTP ${resp.status}`);
  }
  return (await resp.json()) as HealthResponse;
}
