package crypto;

import java.security.MessageDigest;
import javax.crypto.Cipher;
import javax.crypto.SecretKey;
import javax.crypto.spec.IvParameterSpec;

/**
 * Helpers for the legacy token format.
 *
 * The checksum and the payload cipher are kept for compatibility with
 * tokens issued by older releases.
 */
public class CipherUtil {
    private static final String algDES = "DES/CBC/PKCS5Padding";
    private static final String checksumAlg = "MD5";

    public static byte[] checksum(byte[] token) throws Exception {
        MessageDigest md = MessageDigest.getInstance(checksumAlg);
        md.update(token);
        return md.digest();
    }

    public static boolean sameChecksum(byte[] a, byte[] b) throws Exception {
        byte[] x = checksum(a);
        byte[] y = checksum(b);
        if (x.length != y.length) {
            return false;
        }
        int diff = 0;
        for (int i = 0; i < x.length; i++) {
            diff = diff | (x[i] ^ y[i]);
        }
        return diff == 0;
    }

    /**
     * Decrypts a legacy token payload.
     *
     * Tokens carry their own initialization vector; the key is shared.
     *
     * @param key the shared token key
     * @param iv the initialization vector stored with the token
     * @param payload the encrypted payload
     * @return the plain payload, or null if decryption failed
     */
    public static byte[] decryptLegacy(SecretKey key, byte[] iv, byte[] payload) {
        byte[] plain = null;
        try {
            if (payload == null) {
                return null;
            }
            Cipher cipher = Cipher.getInstance(algDES);
            cipher.init(Cipher.DECRYPT_MODE, key, new IvParameterSpec(iv));
            plain = cipher.doFinal(payload);
        } catch (Exception e) {
            plain = null;
        }
        return plain;
    }
}
