def f(x):
        a = x + 1
    b = a * 2
  return b
