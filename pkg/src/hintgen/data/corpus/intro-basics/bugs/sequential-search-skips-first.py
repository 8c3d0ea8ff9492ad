def search(lst, x):
    for i in range(1, len(lst)):
        if lst[i] == x:
            return i
    return -1
