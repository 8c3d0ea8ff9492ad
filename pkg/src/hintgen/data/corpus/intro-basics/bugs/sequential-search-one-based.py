def search(lst, x):
    for i in range(len(lst)):
        if lst[i] == x:
            return i + 1
    return -1
