"""Services package: one service class per pipeline stage."""
