"""Walk through the segmentation and classification metrics on a tiny
hand-checkable fixture.

The 4x4 scene has two ground-truth classes split between columns 1 and
2, while the segmentation puts its boundary one column later. Every
number printed here can be recomputed on paper.
"""

import numpy as np

from superseg import (ConfusionMatrix, LabelMap, Segmentation,
                      average_purity, boundary_recall, cohen_kappa, confusion,
                      f1_score, majority_label, oracle_accuracy,
                      overall_accuracy, undersegmentation_error)


def main():
    gt = LabelMap(np.array([[0, 0, 1, 1]] * 4, dtype=np.int32))
    seg = Segmentation(np.array([[0, 0, 0, 1]] * 4, dtype=np.int32), 2)

    print("ground truth:")
    print(gt.labels)
    print("segmentation:")
    print(seg.regions)

    # Region 0 overlaps both classes: 8 pixels of class 0 leak
    # min(8, 4) and 4 pixels of class 1 leak min(4, 8); region 1 is
    # pure. UE = (4 + 4 + 0) / 16.
    print(f"\nundersegmentation error: {undersegmentation_error(seg, gt):.4f}"
          " (expected 0.5)")

    # The gt boundary sits on columns 1-2, the seg boundary on columns
    # 2-3: half the gt boundary pixels are hit exactly, all of them
    # within a 3-pixel tolerance.
    print(f"boundary recall tol=0:   {boundary_recall(seg, gt, tol=0):.4f}"
          " (expected 0.5)")
    print(f"boundary recall tol=3:   {boundary_recall(seg, gt, tol=3):.4f}"
          " (expected 1.0)")

    # Region purities are 8/12 and 4/4; their unweighted mean is 5/6.
    print(f"average purity:          {average_purity(seg, gt):.4f}"
          f" (expected {5 / 6:.4f})")

    # Painting each region with its majority label recovers 12 of the
    # 16 pixels.
    print(f"oracle accuracy:         {oracle_accuracy(seg, gt):.4f}"
          " (expected 0.75)")

    # The oracle's painted map doubles as a predicted semantic map for
    # the classification metrics.
    painted = LabelMap(majority_label(seg, gt)[seg.regions])
    cm = confusion(painted, gt, num_classes=2)
    print("\nconfusion matrix (rows = ground truth):")
    print(cm.counts)
    print(f"overall accuracy: {overall_accuracy(cm):.4f}")
    print(f"cohen's kappa:    {cohen_kappa(cm):.4f}")
    print(f"F1 class 1:       {f1_score(cm, 1):.4f}")

    # And the textbook kappa example: two raters agreeing on 4 of 6.
    cm = ConfusionMatrix(np.array([[2, 1], [1, 2]], dtype=np.int64))
    print(f"\nkappa([[2,1],[1,2]]) = {cohen_kappa(cm):.4f} (expected 1/3)")


if __name__ == "__main__":
    main()
