# target: describe
def describe(x):
    """Docstring with a fake
def not_a_function(): inside it."""
    text = """
def also_not_real():
    pass
"""
    return f"{x}: {len(text)}"
