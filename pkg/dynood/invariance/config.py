# Gate threshold on the per-dimension population variance of layer-normalised H
DEFAULT_DELTA = 0.1
# M_I above this marks a dimension as invariant
DEFAULT_CUTOFF = 0.5
# sigmoid(1.0) ~ 0.73, so stable dimensions start on the invariant side of the cutoff
W_I_INIT = 1.0
# Without the gate, sigmoid(0.0) = 0.5 sits on the default cutoff: every dimension starts in P_V
W_I_INIT_UNGATED = 0.0
