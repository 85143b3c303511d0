# target: halve
def halve(x):
    return x / 2


CONSTANT = halve(10)
if __name__ == "__main__":
    print(CONSTANT)
