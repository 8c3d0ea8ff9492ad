cost = 12 $ 3
total = cost ? 0
label = `legacy`
