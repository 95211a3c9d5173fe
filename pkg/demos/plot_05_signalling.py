"""
Sending a message through the clock index
=========================================

When station 1 knows ``m``, the column of ``u`` tells it station 2's
setting, so a bit string encoded in ``b`` arrives without error. Hide ``m``
and the column distribution no longer depends on ``b``: the best guess is a
coin flip.
"""
import numpy as np

from paramdep import (
    CHSH_ANGLES,
    SettingMap,
    bit_error_rate,
    blind_decode,
    build_outcome_functions,
    message_schedule,
    random_schedule,
    run_experiment,
    signal_decode,
    synthesize_regions,
)

rc = synthesize_regions()
fns = build_outcome_functions(rc, SettingMap.from_angles(*CHSH_ANGLES))

message = np.frombuffer(b"hi", dtype=np.uint8)
bits = np.unpackbits(message)
rec = run_experiment(len(bits), message_schedule(bits), 1, fns, rc)
received = np.packbits(signal_decode(rec.station1_view(), rc)).tobytes()
print("sent b'hi', received", received)

###############################################################################
# Error rates with and without the clock index.

n = 100_000
rec = run_experiment(n, random_schedule(n, 5), 5, fns, rc)
print("BER, clock observed:", bit_error_rate(signal_decode(rec.station1_view(), rc), rec.b))
print("BER, clock hidden:  ",
      bit_error_rate(blind_decode(rec.station1_view(hide_clock=True), rc), rec.b))
