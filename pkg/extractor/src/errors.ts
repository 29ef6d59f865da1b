export class ModelUnavailable extends Error {}

export class DecodeFailure extends Error {
  constructor(public readonly file: string, reason: string) {
    super(`${file}: ${reason}`);
  }
}

export class LayerUnknown extends Error {}
