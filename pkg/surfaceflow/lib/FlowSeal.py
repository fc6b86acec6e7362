# -*- coding: utf-8 -*-
# Generic/Built-in
import base64
import hmac
import hashlib
import json


def canonical_json(payload):
    # Sorted keys and repr floats so equal content gives equal bytes
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def fingerprint(payload):
    # Content hash of a validated scenario (any JSON-able mapping)
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


class FlowSeal(object):
    # Signs trajectory payloads with the scenario fingerprint as key,
    # so a trajectory only verifies against the scenario that produced it

    def __init__(self, scenario_fingerprint):
        self.SCENARIO_KEY = scenario_fingerprint

    def __call__(self, times, payloads):
        # Form the message: snapshot count, the times and every payload
        digest = hmac.new(self.SCENARIO_KEY.encode(), digestmod=hashlib.sha256)
        digest.update(str(len(payloads)).encode())
        digest.update(canonical_json([float(t) for t in times]).encode())
        for payload in payloads:
            digest.update(hashlib.sha256(payload).digest())
        return base64.b64encode(digest.digest()).decode()

    def matches(self, seal, times, payloads):
        return hmac.compare_digest(seal, self(times, payloads))
