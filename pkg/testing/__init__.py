# test package; shared fixtures live in conftest.py
