# =============================================================================
# A3T Desk - Test Suite
# =============================================================================
"""
Test suite for A3T Desk.

Test Categories:
- test_smoke.py: Import and loading tests (CICD smoke tests)
- test_dsl.py / test_perturb.py: Spec language and perturbation semantics
- test_corpus.py / test_nn.py: Data handling and the network
- test_abstraction.py / test_ibp.py: Boxes and interval bounds
- test_attack.py / test_train.py / test_evaluation.py: Attacks, training, metrics
- test_cli.py: End-to-end command tests
- test_compare_modes.py: Desk-scale mode comparison (slow)
"""
