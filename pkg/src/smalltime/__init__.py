"""Small-maturity asymptotics of near-the-money call prices."""
